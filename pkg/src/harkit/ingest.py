"""Event-log loading, train/test split policies, and synthetic sessions.

The canonical on-disk format is line-delimited JSON, one event per line:

    {"session": "s01", "ts": "2021-03-04T19:53:04", "room": "kitchen",
     "sensor": "induction stove wattmeter", "kind": "turned OFF",
     "label": 19, "resident": "R1"}

``label`` is a vocabulary index (an exact label name is also accepted).
Scenario membership for the per-scenario split lives in a sidecar manifest:
a JSON object mapping session_id to scenario_id.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .errors import DatasetError, GeneratorError, SplitError, UnknownLabelError, UnknownRoomError
from .model import ActivityLabel, EventKind, HomeProfile, SensorEvent, canonical_label

FIRST_K = "first-k-sessions"
PER_SCENARIO = "per-scenario-session-split"
EXPLICIT = "explicit-lists"


@dataclass(frozen=True)
class Dataset:
    name: str
    sessions: tuple[tuple[str, tuple[SensorEvent, ...]], ...]
    profile_ref: str = ""

    @property
    def session_ids(self) -> tuple[str, ...]:
        return tuple(sid for sid, _ in self.sessions)

    def session(self, session_id: str) -> tuple[SensorEvent, ...]:
        for sid, events in self.sessions:
            if sid == session_id:
                return events
        raise KeyError(session_id)

    @property
    def n_events(self) -> int:
        return sum(len(events) for _, events in self.sessions)


@dataclass(frozen=True)
class SplitPolicy:
    """How to partition a dataset's sessions into train and test sets."""

    kind: str
    k: int = 0
    scenarios: Mapping[str, str] | None = None
    train_ids: tuple[str, ...] = ()
    test_ids: tuple[str, ...] = ()

    @classmethod
    def first_k(cls, k: int) -> "SplitPolicy":
        return cls(kind=FIRST_K, k=k)

    @classmethod
    def per_scenario(cls, scenarios: Mapping[str, str]) -> "SplitPolicy":
        return cls(kind=PER_SCENARIO, scenarios=dict(scenarios))

    @classmethod
    def explicit(cls, train_ids: Sequence[str], test_ids: Sequence[str]) -> "SplitPolicy":
        return cls(kind=EXPLICIT, train_ids=tuple(train_ids), test_ids=tuple(test_ids))


def _parse_kind(raw: str) -> EventKind:
    for kind in EventKind:
        if kind.value == raw:
            return kind
    raise ValueError(f"unknown event kind {raw!r}")


def _parse_label(raw: object, by_index: dict[int, ActivityLabel], by_name: dict[str, int]) -> int:
    if isinstance(raw, bool):
        raise ValueError(f"label must be an index or name, got {raw!r}")
    if isinstance(raw, int):
        if raw not in by_index:
            raise UnknownLabelError(f"unknown label index {raw}")
        return raw
    if isinstance(raw, str):
        idx = by_name.get(canonical_label(raw))
        if idx is None:
            raise UnknownLabelError(f"unknown label {raw!r}")
        return idx
    raise ValueError(f"label must be an index or name, got {raw!r}")


def iter_event_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line number, record) pairs, skipping blank lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise DatasetError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def load_dataset(path: str | Path, profile: HomeProfile) -> Dataset:
    """Load and validate an event log against a profile.

    Sessions keep first-appearance order; ``seq`` is assigned 0..N-1 per
    session in file order. Unknown labels and rooms raise with the offending
    line number.
    """
    path = Path(path)
    by_index = profile.label_by_index()
    by_name = {lab.canonical: lab.index for lab in profile.labels}
    rooms = profile.room_names()

    sessions: dict[str, list[SensorEvent]] = {}
    for lineno, record in iter_event_records(path):
        try:
            session_id = str(record["session"])
            ts = datetime.fromisoformat(str(record["ts"]))
            room = str(record["room"])
            sensor = str(record["sensor"])
            kind = _parse_kind(str(record["kind"]))
            label = _parse_label(record["label"], by_index, by_name)
        except UnknownLabelError as exc:
            raise UnknownLabelError(f"{path}:{lineno}: {exc}") from None
        except (KeyError, ValueError) as exc:
            raise DatasetError(f"{path}:{lineno}: {exc}") from None
        if room not in rooms:
            raise UnknownRoomError(f"{path}:{lineno}: room {room!r} not declared in profile")
        events = sessions.setdefault(session_id, [])
        events.append(
            SensorEvent(
                session_id=session_id,
                seq=len(events),
                timestamp=ts,
                room=room,
                sensor=sensor,
                event_kind=kind,
                truth_label=label,
                value=None if record.get("value") is None else str(record["value"]),
                resident=None if record.get("resident") is None else str(record["resident"]),
            )
        )

    if not sessions:
        raise DatasetError(f"{path}: no events found")
    return Dataset(
        name=profile.dataset_name,
        sessions=tuple((sid, tuple(events)) for sid, events in sessions.items()),
        profile_ref=str(path),
    )


def scan_violations(path: str | Path, profile: HomeProfile) -> list[str]:
    """Lint an event log without raising: collect every violation found.

    Complements :func:`harkit.model.validate_profile` for on-disk data; used
    by the ``validate`` CLI command.
    """
    by_index = profile.label_by_index()
    by_name = {lab.canonical: lab.index for lab in profile.labels}
    rooms = profile.room_names()
    violations: list[str] = []
    seen: dict[int, str] = {}
    for lab in profile.labels:
        if lab.index in seen:
            violations.append(f"duplicate label index {lab.index}: {seen[lab.index]!r} and {lab.name!r}")
        else:
            seen[lab.index] = lab.name
    if not profile.labels:
        violations.append("empty label vocabulary")

    n_records = 0
    try:
        for lineno, record in iter_event_records(path):
            n_records += 1
            room = record.get("room")
            if room is not None and str(room) not in rooms:
                violations.append(f"line {lineno}: unknown room {room!r}")
            try:
                _parse_label(record.get("label"), by_index, by_name)
            except (UnknownLabelError, ValueError) as exc:
                violations.append(f"line {lineno}: {exc}")
            try:
                _parse_kind(str(record.get("kind")))
            except ValueError as exc:
                violations.append(f"line {lineno}: {exc}")
    except DatasetError as exc:
        violations.append(str(exc))
    if n_records == 0:
        violations.append("no events found")
    return violations


def split(dataset: Dataset, policy: SplitPolicy) -> tuple[list[str], list[str]]:
    """Partition session ids into (train, test) under a policy.

    Deterministic for a given dataset and policy; train and test are always
    disjoint.
    """
    ids = list(dataset.session_ids)
    if policy.kind == FIRST_K:
        if not 0 <= policy.k <= len(ids):
            raise SplitError(f"k={policy.k} out of range for {len(ids)} sessions")
        return ids[: policy.k], ids[policy.k :]

    if policy.kind == PER_SCENARIO:
        if policy.scenarios is None:
            raise SplitError("per-scenario policy requires a scenario manifest")
        missing = [sid for sid in ids if sid not in policy.scenarios]
        if missing:
            raise SplitError(f"scenario metadata missing for sessions: {', '.join(missing)}")
        grouped: dict[str, list[str]] = {}
        for sid in ids:
            grouped.setdefault(policy.scenarios[sid], []).append(sid)
        train: list[str] = []
        test: list[str] = []
        for members in grouped.values():
            # 2-session scenarios: 1 train / 1 test; 3-4 sessions: first 2
            # train, rest test. Singletons go to train.
            n_train = 1 if len(members) <= 2 else 2
            train.extend(members[:n_train])
            test.extend(members[n_train:])
        order = {sid: i for i, sid in enumerate(ids)}
        return sorted(train, key=order.__getitem__), sorted(test, key=order.__getitem__)

    if policy.kind == EXPLICIT:
        overlap = set(policy.train_ids) & set(policy.test_ids)
        if overlap:
            raise SplitError(f"train and test overlap: {sorted(overlap)}")
        unknown = [sid for sid in (*policy.train_ids, *policy.test_ids) if sid not in ids]
        if unknown:
            raise SplitError(f"unknown sessions: {', '.join(unknown)}")
        return list(policy.train_ids), list(policy.test_ids)

    raise SplitError(f"unknown split policy kind {policy.kind!r}")


# --- synthetic data -----------------------------------------------------

_DEFAULT_ROOMS: tuple[tuple[str, str], ...] = (
    ("kitchen", "induction stove, fridge, sink, cupboards"),
    ("living room", "tv, sofa, bookshelf"),
    ("bedroom", "bed, wardrobe, desk"),
    ("bathroom", "shower, sink, toilet"),
)

# sensor name -> (room, on-kind, off-kind)
_DEFAULT_SENSORS: tuple[tuple[str, str, EventKind, EventKind], ...] = (
    ("induction stove wattmeter", "kitchen", EventKind.TURNED_ON, EventKind.TURNED_OFF),
    ("fridge door", "kitchen", EventKind.OPENED, EventKind.CLOSED),
    ("cupboard door", "kitchen", EventKind.OPENED, EventKind.CLOSED),
    ("tv wattmeter", "living room", EventKind.TURNED_ON, EventKind.TURNED_OFF),
    ("sofa pressure pad", "living room", EventKind.PRESSURE_ON, EventKind.PRESSURE_OFF),
    ("bed pressure pad", "bedroom", EventKind.PRESSURE_ON, EventKind.PRESSURE_OFF),
    ("wardrobe door", "bedroom", EventKind.OPENED, EventKind.CLOSED),
    ("desk lamp wattmeter", "bedroom", EventKind.TURNED_ON, EventKind.TURNED_OFF),
    ("shower faucet", "bathroom", EventKind.TURNED_ON, EventKind.TURNED_OFF),
    ("bathroom door", "bathroom", EventKind.OPENED, EventKind.CLOSED),
)

# activity name -> room where its sensors fire
_DEFAULT_ACTIVITIES: tuple[tuple[str, str], ...] = (
    ("preparing dinner", "kitchen"),
    ("watching tv", "living room"),
    ("sleeping", "bedroom"),
    ("personal washing", "bathroom"),
    ("working at desk", "bedroom"),
    ("having a snack", "kitchen"),
)


@dataclass(frozen=True)
class GeneratorSpec:
    """Configuration for :func:`generate_synthetic`."""

    sessions: int = 3
    events_per_session: int = 40
    residents: int = 2
    rooms: tuple[tuple[str, str], ...] = _DEFAULT_ROOMS
    sensors: tuple[tuple[str, str, EventKind, EventKind], ...] = _DEFAULT_SENSORS
    activities: tuple[tuple[str, str], ...] = _DEFAULT_ACTIVITIES
    dataset_name: str = "synthetic"


def _check_spec(spec: GeneratorSpec) -> None:
    if spec.sessions < 1:
        raise GeneratorError("sessions must be >= 1")
    if spec.events_per_session < 1:
        raise GeneratorError("events_per_session must be >= 1")
    if not 1 <= spec.residents <= 4:
        raise GeneratorError("residents must be in 1..4")
    if not spec.activities:
        raise GeneratorError("activity set must be non-empty")
    if not spec.sensors or not spec.rooms:
        raise GeneratorError("rooms and sensors must be non-empty")
    rooms = {name for name, _ in spec.rooms}
    for sensor, room, _, _ in spec.sensors:
        if room not in rooms:
            raise GeneratorError(f"sensor {sensor!r} references undeclared room {room!r}")
    activity_rooms = {room for _, room in spec.activities}
    sensor_rooms = {room for _, room, _, _ in spec.sensors}
    uncovered = activity_rooms - sensor_rooms
    if uncovered:
        raise GeneratorError(f"no sensors in rooms: {', '.join(sorted(uncovered))}")


def generate_synthetic(spec: GeneratorSpec, seed: int) -> Dataset:
    """Generate a deterministic multi-resident dataset for desk-scale tests.

    Each resident walks through a random sequence of activity segments; the
    session's event stream interleaves them. With more than one resident the
    first few events cycle through all residents (in shuffled order), so
    every session provably contains several residents' events.
    """
    _check_spec(spec)
    rng = random.Random(seed)
    labels = {name: i + 1 for i, (name, _) in enumerate(spec.activities)}
    by_room: dict[str, list[tuple[str, str, EventKind, EventKind]]] = {}
    for sensor in spec.sensors:
        by_room.setdefault(sensor[1], []).append(sensor)

    sessions = []
    base = datetime(2021, 3, 4, 8, 0, 0)
    for s in range(spec.sessions):
        session_id = f"syn{s:02d}"
        # Per-resident current activity; switches with small probability.
        current: list[tuple[str, str]] = [
            spec.activities[rng.randrange(len(spec.activities))] for _ in range(spec.residents)
        ]
        order = list(range(spec.residents))
        rng.shuffle(order)
        clock = base + timedelta(days=s)
        events: list[SensorEvent] = []
        for i in range(spec.events_per_session):
            if spec.residents > 1 and i < spec.residents:
                r = order[i]
            else:
                r = rng.randrange(spec.residents)
            if rng.random() < 0.15:
                current[r] = spec.activities[rng.randrange(len(spec.activities))]
            activity, room = current[r]
            sensor, _, on_kind, off_kind = by_room[room][rng.randrange(len(by_room[room]))]
            kind = on_kind if rng.random() < 0.5 else off_kind
            clock = clock + timedelta(seconds=rng.randrange(0, 30))
            events.append(
                SensorEvent(
                    session_id=session_id,
                    seq=i,
                    timestamp=clock,
                    room=room,
                    sensor=sensor,
                    event_kind=kind,
                    truth_label=labels[activity],
                    resident=f"R{r + 1}",
                )
            )
        sessions.append((session_id, tuple(events)))
    return Dataset(name=spec.dataset_name, sessions=tuple(sessions))


def synthetic_profile(spec: GeneratorSpec) -> HomeProfile:
    """The home profile matching :func:`generate_synthetic` output."""
    _check_spec(spec)
    return HomeProfile(
        dataset_name=spec.dataset_name,
        role_text=(
            "You are an expert in smart-home monitoring. Several residents live in "
            "the home and may act at the same time, so consecutive sensor events can "
            "belong to different activities. Infer the activity behind each sensor "
            "event."
        ),
        rooms=spec.rooms,
        io_description=(
            "The input is a JSON list of sensor events, each with an integer \"id\", "
            "a \"time\" of day (HH:mm:ss), and an \"event\" description of the form "
            "\"<room> <sensor> <state change>\"."
        ),
        labels=tuple(
            ActivityLabel(index=i + 1, name=name)
            for i, (name, _) in enumerate(spec.activities)
        ),
        rules=(),
        static_example=(
            '[{"id":0,"time":"08:12:01","event":"kitchen fridge door OPENED"}]',
            '[{"id":0,"activity":"6. having a snack"}]',
        ),
        notes="synthetic profile generated for desk-scale testing",
    )


def event_to_record(event: SensorEvent) -> dict:
    """One event as its line-JSON record (inverse of :func:`load_dataset`)."""
    record = {
        "session": event.session_id,
        "ts": event.timestamp.isoformat(sep="T", timespec="seconds"),
        "room": event.room,
        "sensor": event.sensor,
        "kind": event.event_kind.value,
        "label": event.truth_label,
    }
    if event.value is not None:
        record["value"] = event.value
    if event.resident is not None:
        record["resident"] = event.resident
    return record


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset in the canonical line-delimited JSON format."""
    with open(path, "w", encoding="utf-8") as fh:
        for _, events in dataset.sessions:
            for event in events:
                fh.write(json.dumps(event_to_record(event), ensure_ascii=False) + "\n")
