"""Independent brute-force metric computation used to cross-check scoring.

Deliberately implemented from scratch: counts come from plain per-event
loops and per-class F1 goes through precision/recall in exact rational
arithmetic, so any bookkeeping mistake in the production path shows up as a
mismatch.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Optional


def brute_force_f1(
    truth_by_id: Mapping[int, int], matched_by_id: Mapping[int, Optional[int]]
) -> tuple[float, float]:
    """(macro F1, micro F1) for one session.

    ``truth_by_id`` maps event id to truth class. ``matched_by_id`` maps
    event id to the matched class, or None for an unmatchable label; ids
    absent from it are missed events.
    """
    classes = set(truth_by_id.values())
    classes |= {m for m in matched_by_id.values() if m is not None}
    tp = {c: 0 for c in classes}
    fp = {c: 0 for c in classes}
    fn = {c: 0 for c in classes}

    for event_id, truth in truth_by_id.items():
        if event_id in matched_by_id and matched_by_id[event_id] == truth:
            tp[truth] += 1
        else:
            fn[truth] += 1
            predicted = matched_by_id.get(event_id)
            if predicted is not None:
                fp[predicted] += 1

    def class_f1(c: int) -> Fraction:
        if tp[c] == 0:
            return Fraction(0)
        precision = Fraction(tp[c], tp[c] + fp[c])
        recall = Fraction(tp[c], tp[c] + fn[c])
        return 2 * precision * recall / (precision + recall)

    truth_classes = sorted(set(truth_by_id.values()))
    macro = (
        sum(float(class_f1(c)) for c in truth_classes) / len(truth_classes)
        if truth_classes
        else 0.0
    )
    total_tp = sum(tp.values())
    denominator = 2 * total_tp + sum(fp.values()) + sum(fn.values())
    micro = float(Fraction(2 * total_tp, denominator)) if denominator else 0.0
    return macro, micro
