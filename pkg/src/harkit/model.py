"""Domain types shared by the whole pipeline.

Everything here is immutable after construction and safe to share across
threads. Invariants that depend on external data (label membership, room
membership) are enforced by the loaders in :mod:`harkit.ingest`, not by the
dataclasses themselves; :func:`validate_profile` produces a report instead of
raising so it can drive a lint-style CLI command.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ProfileError


class EventKind(Enum):
    """Sensor transition kinds. Values double as the on-disk spelling."""

    TURNED_ON = "turned ON"
    TURNED_OFF = "turned OFF"
    OPENED = "OPENED"
    CLOSED = "CLOSED"
    PRESSURE_ON = "pressure ON"
    PRESSURE_OFF = "pressure OFF"
    VALUE = "value"


class FailureKind(Enum):
    """Why an inference produced no usable predictions."""

    TRANSPORT_FAILED = "transport-failed"
    MALFORMED_OUTPUT = "malformed-output"
    EMPTY_OUTPUT = "empty-output"


_WS_RE = re.compile(r"\s+")


def canonical_label(name: str) -> str:
    """Normalize a label name: lowercase, trimmed, inner whitespace collapsed.

    Idempotent: ``canonical_label(canonical_label(x)) == canonical_label(x)``.
    """
    return _WS_RE.sub(" ", name.strip()).lower()


@dataclass(frozen=True)
class SensorEvent:
    """One raw sensor reading inside a recording session.

    ``seq`` is the event's position within its session (0-based, assigned in
    file order); timestamp ties are allowed and broken by ``seq``.
    ``resident`` is carried for generation and inspection but ignored by
    scoring.
    """

    session_id: str
    seq: int
    timestamp: datetime
    room: str
    sensor: str
    event_kind: EventKind
    truth_label: int
    value: Optional[str] = None
    resident: Optional[str] = None


@dataclass(frozen=True)
class TextualizedEvent:
    """The id/time/description form of a sensor event."""

    id: int
    time: str
    event: str

    def to_json_obj(self) -> dict:
        return {"id": self.id, "time": self.time, "event": self.event}

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "TextualizedEvent":
        return cls(id=int(obj["id"]), time=str(obj["time"]), event=str(obj["event"]))


@dataclass(frozen=True)
class Window:
    """A fixed-size run of consecutive textualized events from one session.

    ``truth`` is parallel to ``events``. Event ids are session-scoped (not
    restarted per window), so a prediction's id is unambiguous anywhere in
    the session.
    """

    window_id: int
    session_id: str
    events: tuple[TextualizedEvent, ...]
    truth: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.events) != len(self.truth):
            raise ValueError(
                f"window {self.window_id}: {len(self.events)} events vs {len(self.truth)} truth labels"
            )

    @property
    def event_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.events)


@dataclass(frozen=True)
class ActivityLabel:
    """One entry of a dataset's activity vocabulary."""

    index: int
    name: str

    @property
    def canonical(self) -> str:
        return canonical_label(self.name)

    def render(self) -> str:
        """The "N. name" form used in prompts and answers."""
        return f"{self.index}. {self.name}"


@dataclass(frozen=True)
class HomeProfile:
    """Per-dataset prompt ingredients.

    ``rooms`` maps room name to a short description of the appliances it
    contains. ``static_example`` is a structural (input text, output text)
    pair, not a real labeled window.
    """

    dataset_name: str
    role_text: str
    rooms: tuple[tuple[str, str], ...]
    io_description: str
    labels: tuple[ActivityLabel, ...]
    rules: tuple[str, ...] = ()
    static_example: tuple[str, str] = ("", "")
    notes: str = ""

    def label_by_index(self) -> dict[int, ActivityLabel]:
        return {lab.index: lab for lab in self.labels}

    def room_names(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.rooms)


@dataclass(frozen=True)
class Prediction:
    """One extracted per-event label prediction.

    ``matched`` is the vocabulary index the raw label resolved to, or None
    when the label is unmatchable.
    """

    event_id: int
    raw_label: str
    matched: Optional[int] = None


@dataclass(frozen=True)
class InferenceResult:
    """Everything captured for one window inference.

    ``reasoning_trace`` is the content of the first think-delimited segment
    of ``raw_text`` (empty when the completion has none); ``raw_text`` is
    always kept whole.
    """

    window_id: int
    raw_text: str
    reasoning_trace: str = ""
    predictions: tuple[Prediction, ...] = ()
    failure: Optional[FailureKind] = None
    latency_ms: int = 0
    attempt_count: int = 1


def validate_profile(
    profile: HomeProfile,
    sessions: Iterable[tuple[str, Sequence[SensorEvent]]] = (),
) -> list[str]:
    """Check a profile against itself and, optionally, event streams.

    Returns a list of human-readable violations; an empty list means valid.
    Checks: non-empty vocabulary, unique label indices, every referenced room
    declared, every truth label in the vocabulary.
    """
    violations: list[str] = []
    if not profile.labels:
        violations.append("empty label vocabulary")
    seen: dict[int, str] = {}
    for lab in profile.labels:
        if lab.index in seen:
            violations.append(
                f"duplicate label index {lab.index}: {seen[lab.index]!r} and {lab.name!r}"
            )
        else:
            seen[lab.index] = lab.name

    rooms = profile.room_names()
    known = set(seen)
    missing_rooms: set[str] = set()
    missing_labels: set[int] = set()
    for session_id, events in sessions:
        for ev in events:
            if ev.room not in rooms and ev.room not in missing_rooms:
                missing_rooms.add(ev.room)
                violations.append(
                    f"unknown room {ev.room!r} (session {session_id}) not declared in profile"
                )
            if ev.truth_label not in known and ev.truth_label not in missing_labels:
                missing_labels.add(ev.truth_label)
                violations.append(
                    f"unknown label {ev.truth_label} (session {session_id}) not in vocabulary"
                )
    return violations


def load_profile(path: str | Path) -> HomeProfile:
    """Load a home profile from its JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ProfileError(f"cannot read profile {path}: {exc}") from exc

    try:
        labels = tuple(
            ActivityLabel(index=int(item["index"]), name=str(item["name"]))
            for item in doc["labels"]
        )
        rooms = tuple(
            (str(item["name"]), str(item.get("appliances", ""))) for item in doc["rooms"]
        )
        example = doc.get("static_example", {})
        profile = HomeProfile(
            dataset_name=str(doc["dataset_name"]),
            role_text=str(doc["role_text"]),
            rooms=rooms,
            io_description=str(doc["io_description"]),
            labels=labels,
            rules=tuple(str(r) for r in doc.get("rules", [])),
            static_example=(str(example.get("input", "")), str(example.get("output", ""))),
            notes=str(doc.get("notes", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProfileError(f"profile {path} is malformed: {exc}") from exc

    problems = validate_profile(profile)
    if problems:
        raise ProfileError(f"profile {path} is invalid: " + "; ".join(problems))
    return profile


def profile_to_json_obj(profile: HomeProfile) -> dict:
    """Inverse of :func:`load_profile` for writing profiles to disk."""
    obj: dict = {
        "dataset_name": profile.dataset_name,
        "role_text": profile.role_text,
        "rooms": [{"name": n, "appliances": a} for n, a in profile.rooms],
        "io_description": profile.io_description,
        "labels": [{"index": lab.index, "name": lab.name} for lab in profile.labels],
        "rules": list(profile.rules),
        "static_example": {
            "input": profile.static_example[0],
            "output": profile.static_example[1],
        },
    }
    if profile.notes:
        obj["notes"] = profile.notes
    return obj
