"""Mock backend that answers every window with its ground-truth labels.

Useful as an end-to-end sanity check: a run against this backend must score
a mean F1 of exactly 1.0. Point a backend config at this file:

    "backend": {"kind": "mock", "script": "scripts/ground_truth_mock.py"}
"""

import json


def respond(request: dict) -> str:
    answer = [
        {"id": event_id, "activity": str(label)}
        for event_id, label in zip(request["event_ids"], request["truth"])
    ]
    return "<think>\nscripted ground truth\n</think>\n" + json.dumps(answer)
