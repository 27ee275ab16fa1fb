from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from harkit.errors import ProfileError
from harkit.model import (
    ActivityLabel,
    HomeProfile,
    TextualizedEvent,
    canonical_label,
    load_profile,
    profile_to_json_obj,
    validate_profile,
)

from .conftest import make_event


@given(st.text(max_size=80))
def test_canonicalization_idempotent(name):
    once = canonical_label(name)
    assert canonical_label(once) == once


def test_canonicalization_examples():
    assert canonical_label("  Preparing   Dinner ") == "preparing dinner"
    assert canonical_label("preparing dinner") == "preparing dinner"


def test_textualized_event_round_trip():
    event = TextualizedEvent(id=42, time="19:53:04", event="kitchen induction stove wattmeter turned OFF")
    assert TextualizedEvent.from_json_obj(json.loads(json.dumps(event.to_json_obj()))) == event


def test_validate_profile_clean(profile):
    sessions = [("s01", [make_event(0, room="kitchen"), make_event(1, room="bedroom", label=2)])]
    assert validate_profile(profile, sessions) == []


def test_validate_profile_unknown_room(profile):
    stripped = HomeProfile(
        dataset_name=profile.dataset_name,
        role_text=profile.role_text,
        rooms=tuple((n, a) for n, a in profile.rooms if n != "bathroom"),
        io_description=profile.io_description,
        labels=profile.labels,
    )
    sessions = [("s01", [make_event(0, room="bathroom", label=25)])]
    report = validate_profile(stripped, sessions)
    assert len(report) == 1
    assert "bathroom" in report[0]


def test_validate_profile_duplicate_index(profile):
    doubled = HomeProfile(
        dataset_name=profile.dataset_name,
        role_text=profile.role_text,
        rooms=profile.rooms,
        io_description=profile.io_description,
        labels=profile.labels + (ActivityLabel(19, "making dinner"),),
    )
    report = validate_profile(doubled, [])
    assert len(report) == 1
    assert "19" in report[0]


def test_validate_profile_empty_vocabulary(profile):
    empty = HomeProfile(
        dataset_name="x",
        role_text="r",
        rooms=profile.rooms,
        io_description="io",
        labels=(),
    )
    assert any("empty" in v for v in validate_profile(empty, []))


def test_profile_file_round_trip(tmp_path, profile):
    path = tmp_path / "profile.json"
    path.write_text(json.dumps(profile_to_json_obj(profile)), encoding="utf-8")
    assert load_profile(path) == profile


def test_load_profile_rejects_duplicate_indices(tmp_path, profile):
    obj = profile_to_json_obj(profile)
    obj["labels"].append({"index": 19, "name": "making dinner"})
    path = tmp_path / "profile.json"
    path.write_text(json.dumps(obj), encoding="utf-8")
    with pytest.raises(ProfileError, match="duplicate"):
        load_profile(path)


def test_load_profile_missing_field(tmp_path):
    path = tmp_path / "profile.json"
    path.write_text(json.dumps({"dataset_name": "x"}), encoding="utf-8")
    with pytest.raises(ProfileError):
        load_profile(path)


def test_window_rejects_mismatched_truth():
    from harkit.model import Window

    event = TextualizedEvent(id=0, time="00:00:00", event="bedroom door OPENED")
    with pytest.raises(ValueError):
        Window(window_id=0, session_id="s", events=(event,), truth=(1, 2))
