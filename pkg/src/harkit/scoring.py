"""Answer extraction and the per-session evaluation rules.

Scoring is strict about totality: every sensor event of a session ends up in
exactly one of three buckets.

* correct: a prediction exists for the event's id and resolves to the truth
  label;
* wrong: a prediction exists but resolves to another label, or to nothing;
* missed: no prediction carries the event's id, including whole windows lost
  to transport failures or malformed output.

Missed and unmatchable events count against F1 as false negatives of the
truth class; they never create a false positive.
"""

from __future__ import annotations

import json
import re
import statistics
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from .model import ActivityLabel, FailureKind, InferenceResult, Prediction, Window, canonical_label
from .traces import first_trace, strip_traces

_LEADING_INDEX_RE = re.compile(r"^\s*(\d+)\s*\.")
_BARE_INDEX_RE = re.compile(r"^\s*(\d+)\s*$")
_INDEX_PREFIX_RE = re.compile(r"^\s*\d+\s*\.\s*")
_INT_RE = re.compile(r"-?\d+")


def match_label(raw_label: str, vocabulary: Sequence[ActivityLabel]) -> Optional[int]:
    """Resolve a model-emitted label string to a vocabulary index.

    Tried in order: a leading integer index ("19. preparing dinner", bare
    "19"), exact canonical-name equality, then canonical-name equality after
    stripping an "N. " prefix. No fuzzy matching: anything else is
    unmatchable and returns None.
    """
    if not vocabulary:
        raise ValueError("vocabulary must be non-empty")
    indices = {lab.index for lab in vocabulary}
    m = _LEADING_INDEX_RE.match(raw_label) or _BARE_INDEX_RE.match(raw_label)
    if m:
        idx = int(m.group(1))
        if idx in indices:
            return idx
    by_name = {lab.canonical: lab.index for lab in vocabulary}
    direct = by_name.get(canonical_label(raw_label))
    if direct is not None:
        return direct
    stripped = _INDEX_PREFIX_RE.sub("", raw_label)
    if stripped != raw_label:
        return by_name.get(canonical_label(stripped))
    return None


def _last_json_array(text: str) -> Optional[list]:
    """The last non-overlapping syntactically valid JSON array in ``text``."""
    decoder = json.JSONDecoder()
    pos = 0
    last: Optional[list] = None
    while True:
        start = text.find("[", pos)
        if start == -1:
            return last
        try:
            value, end = decoder.raw_decode(text, start)
        except (ValueError, RecursionError):
            pos = start + 1
            continue
        if isinstance(value, list):
            last = value
            pos = end
        else:
            pos = start + 1


def _coerce_event_id(value: object) -> Optional[int]:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and _INT_RE.fullmatch(value.strip()):
        return int(value.strip())
    return None


def _extract(raw_text: str | bytes, window: Window) -> tuple[bool, tuple[Prediction, ...]]:
    if isinstance(raw_text, bytes):
        raw_text = raw_text.decode("utf-8", errors="replace")
    array = _last_json_array(strip_traces(raw_text))
    if array is None:
        return False, ()
    valid_ids = set(window.event_ids)
    picked: dict[int, Prediction] = {}
    for entry in array:
        if not isinstance(entry, dict):
            continue
        event_id = _coerce_event_id(entry.get("id"))
        if event_id is None or event_id not in valid_ids:
            continue
        label = entry.get("activity", entry.get("label"))
        if isinstance(label, (int, float)) and not isinstance(label, bool):
            label = str(label)
        if not isinstance(label, str):
            continue
        picked[event_id] = Prediction(event_id=event_id, raw_label=label)
    return True, tuple(picked.values())


def extract_predictions(raw_text: str | bytes, window: Window) -> tuple[Prediction, ...]:
    """Pull per-event predictions out of an arbitrary completion. Never raises.

    Think segments are stripped first; the answer is the last syntactically
    valid JSON array in what remains (reasoning models often emit draft
    arrays before the final one). Accepted entries are objects with an "id"
    key plus an "activity" (or "label") value; ids outside the window are
    dropped and duplicate ids keep the last occurrence. Anything unparseable
    yields an empty tuple.
    """
    try:
        _, predictions = _extract(raw_text, window)
    except Exception:
        return ()
    return predictions


def complete_result(
    result: InferenceResult, window: Window, vocabulary: Sequence[ActivityLabel]
) -> InferenceResult:
    """Fill a gateway result with extracted predictions and a failure cause."""
    if result.failure is FailureKind.TRANSPORT_FAILED:
        return result
    found, predictions = _extract(result.raw_text, window)
    predictions = tuple(
        replace(p, matched=match_label(p.raw_label, vocabulary)) for p in predictions
    )
    failure: Optional[FailureKind] = None
    if not result.raw_text.strip():
        failure = FailureKind.EMPTY_OUTPUT
    elif not found:
        failure = FailureKind.MALFORMED_OUTPUT
    return replace(
        result,
        predictions=predictions,
        failure=failure,
        reasoning_trace=result.reasoning_trace or first_trace(result.raw_text),
    )


@dataclass(frozen=True)
class SessionMetrics:
    """Event-level scoring outcome for one session."""

    session_id: str
    n_events: int
    n_correct: int
    n_wrong: int
    n_missed: int
    f1_macro: float
    f1_micro: float
    per_label_counts: Mapping[int, tuple[int, int, int]]

    @property
    def missed_pct(self) -> float:
        return 100.0 * self.n_missed / self.n_events if self.n_events else 0.0


def score_session(
    windows: Sequence[Window],
    results: Sequence[InferenceResult],
    vocabulary: Sequence[ActivityLabel],
) -> SessionMetrics:
    """Score one session's windows against its inference results.

    ``results`` must cover exactly the given windows (failed ones included).
    Macro F1 averages per-class F1 over the classes present in the session's
    truth; micro F1 is 2tp / (2tp + fp + fn) over pooled counts, which equals
    the tp / (tp + (fp + fn) / 2) form.
    """
    by_id = {r.window_id: r for r in results}
    want = {w.window_id for w in windows}
    if set(by_id) != want or len(results) != len(windows):
        raise ValueError(
            f"results do not cover the session's windows: have {sorted(by_id)}, want {sorted(want)}"
        )
    session_id = windows[0].session_id if windows else ""

    tp: dict[int, int] = {}
    fp: dict[int, int] = {}
    fn: dict[int, int] = {}
    n_events = n_correct = n_wrong = n_missed = 0
    truth_classes: set[int] = set()
    for window in windows:
        result = by_id[window.window_id]
        predicted = {p.event_id: p for p in result.predictions}
        for event, truth in zip(window.events, window.truth):
            n_events += 1
            truth_classes.add(truth)
            pred = predicted.get(event.id)
            if pred is None:
                n_missed += 1
                fn[truth] = fn.get(truth, 0) + 1
                continue
            matched = match_label(pred.raw_label, vocabulary)
            if matched == truth:
                n_correct += 1
                tp[truth] = tp.get(truth, 0) + 1
            else:
                n_wrong += 1
                fn[truth] = fn.get(truth, 0) + 1
                if matched is not None:
                    fp[matched] = fp.get(matched, 0) + 1

    def class_f1(c: int) -> float:
        denominator = 2 * tp.get(c, 0) + fp.get(c, 0) + fn.get(c, 0)
        return 2 * tp.get(c, 0) / denominator if denominator else 0.0

    f1_macro = (
        sum(class_f1(c) for c in sorted(truth_classes)) / len(truth_classes)
        if truth_classes
        else 0.0
    )
    total_tp = sum(tp.values())
    denominator = 2 * total_tp + sum(fp.values()) + sum(fn.values())
    f1_micro = 2 * total_tp / denominator if denominator else 0.0

    involved = sorted(set(tp) | set(fp) | set(fn))
    return SessionMetrics(
        session_id=session_id,
        n_events=n_events,
        n_correct=n_correct,
        n_wrong=n_wrong,
        n_missed=n_missed,
        f1_macro=f1_macro,
        f1_micro=f1_micro,
        per_label_counts={c: (tp.get(c, 0), fp.get(c, 0), fn.get(c, 0)) for c in involved},
    )


def format_mean_std(mean: float, std: float) -> str:
    return f"{mean:.2f} ± {std:.2f}"


@dataclass(frozen=True)
class DatasetReport:
    """Per-session metrics plus their across-session aggregates."""

    sessions: tuple[SessionMetrics, ...]
    mean_f1_macro: float
    mean_f1_micro: float
    missed_mean: float
    missed_std: float
    model: str = ""
    meta: Mapping[str, object] = field(default_factory=dict)

    @property
    def missed_summary(self) -> str:
        return format_mean_std(self.missed_mean, self.missed_std)


def aggregate(
    session_metrics: Sequence[SessionMetrics],
    model: str = "",
    meta: Mapping[str, object] | None = None,
) -> DatasetReport:
    """Average per-session metrics across a test set.

    F1 means are plain arithmetic means; the missed-event spread is the
    population standard deviation, rendered "M ± S" with two decimals.
    """
    if not session_metrics:
        raise ValueError("cannot aggregate zero sessions")
    missed = [m.missed_pct for m in session_metrics]
    return DatasetReport(
        sessions=tuple(session_metrics),
        mean_f1_macro=sum(m.f1_macro for m in session_metrics) / len(session_metrics),
        mean_f1_micro=sum(m.f1_micro for m in session_metrics) / len(session_metrics),
        missed_mean=sum(missed) / len(missed),
        missed_std=statistics.pstdev(missed),
        model=model,
        meta=dict(meta) if meta else {},
    )
