from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path

import pytest

from harkit.model import ActivityLabel, HomeProfile, SensorEvent, EventKind

GROUND_TRUTH_MOCK = """\
import json

def respond(request):
    answer = [
        {"id": event_id, "activity": str(label)}
        for event_id, label in zip(request["event_ids"], request["truth"])
    ]
    return "<think>\\nscripted ground truth\\n</think>\\n" + json.dumps(answer)
"""

DROP_TENTH_MOCK = """\
import json

def respond(request):
    answer = [
        {"id": event_id, "activity": str(label)}
        for event_id, label in zip(request["event_ids"], request["truth"])
        if event_id % 10 != 9
    ]
    return json.dumps(answer)
"""


@pytest.fixture
def profile() -> HomeProfile:
    return HomeProfile(
        dataset_name="testhome",
        role_text=(
            "You watch the sensor log of a home with several residents and infer "
            "the activity behind each sensor event."
        ),
        rooms=(
            ("kitchen", "induction stove, fridge, cupboards"),
            ("living room", "tv, sofa"),
            ("bedroom", "bed, wardrobe"),
            ("bathroom", "shower, sink"),
        ),
        io_description=(
            "The input is a JSON list of sensor events with integer ids, a time of "
            "day, and a textual description."
        ),
        labels=(
            ActivityLabel(1, "watching tv"),
            ActivityLabel(2, "sleeping"),
            ActivityLabel(19, "preparing dinner"),
            ActivityLabel(25, "personal washing"),
        ),
        rules=("If the stove is in use, prefer cooking-related activities.",),
        static_example=(
            '[{"id":0,"time":"08:00:00","event":"kitchen fridge door OPENED"}]',
            '[{"id":0,"activity":"19. preparing dinner"}]',
        ),
    )


def make_event(
    seq: int,
    session_id: str = "s01",
    room: str = "kitchen",
    sensor: str = "fridge door",
    kind: EventKind = EventKind.OPENED,
    label: int = 19,
    hh: int = 9,
    mm: int = 0,
    ss: int = 0,
    resident: str | None = None,
) -> SensorEvent:
    return SensorEvent(
        session_id=session_id,
        seq=seq,
        timestamp=datetime(2021, 3, 4, hh, mm, ss),
        room=room,
        sensor=sensor,
        event_kind=kind,
        truth_label=label,
        resident=resident,
    )


@pytest.fixture
def write_mock_script(tmp_path: Path):
    def _write(source: str, name: str = "mock_backend.py") -> Path:
        path = tmp_path / name
        path.write_text(source, encoding="utf-8")
        return path

    return _write


def write_events_jsonl(path: Path, records: list[dict]) -> Path:
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path
