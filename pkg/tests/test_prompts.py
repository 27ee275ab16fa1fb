from __future__ import annotations

import json
from dataclasses import replace

from harkit.model import TextualizedEvent, Window
from harkit.prompts import (
    EXAMPLE_INPUT_HEADER,
    LABELS_HEADER,
    ROOMS_HEADER,
    RULES_HEADER,
    TASK_HEADER,
    build_prompt,
    expected_output_schema,
)
from harkit.scoring import extract_predictions
from harkit.windows import window_to_json


def _window(n: int = 3, start_id: int = 0) -> Window:
    events = tuple(
        TextualizedEvent(id=start_id + i, time=f"09:00:{i:02d}", event="kitchen fridge door OPENED")
        for i in range(n)
    )
    return Window(window_id=0, session_id="s01", events=events, truth=(19,) * n)


def test_build_prompt_deterministic(profile):
    first = build_prompt(_window(), profile)
    second = build_prompt(_window(), profile)
    assert first == second
    assert first.prompt_hash == second.prompt_hash


def test_rules_section_omitted_when_empty(profile):
    bare = replace(profile, rules=())
    prompt = build_prompt(_window(), bare)
    assert RULES_HEADER not in prompt.user_text
    with_rules = build_prompt(_window(), profile)
    assert RULES_HEADER in with_rules.user_text


def test_label_line_rendering(profile):
    prompt = build_prompt(_window(), profile)
    assert "\n19. preparing dinner\n" in prompt.user_text


def test_schema_mentions_both_keys(profile):
    schema = expected_output_schema(profile)
    assert '"id"' in schema and '"activity"' in schema


def test_schema_embedded_verbatim(profile):
    prompt = build_prompt(_window(), profile)
    assert expected_output_schema(profile) in prompt.user_text


def test_schema_round_trips_through_extractor(profile):
    """An answer in exactly the instructed format parses back out."""
    window = _window(2, start_id=10)
    answer = json.dumps(
        [{"id": event.id, "activity": "19. preparing dinner"} for event in window.events]
    )
    predictions = extract_predictions(answer, window)
    assert [p.event_id for p in predictions] == [10, 11]
    assert all(p.raw_label == "19. preparing dinner" for p in predictions)


def test_payload_appears_exactly_once(profile):
    window = _window(4)
    prompt = build_prompt(window, profile)
    assert prompt.user_text.count(window_to_json(window)) == 1


def test_prompts_differ_only_in_payload_region(profile):
    a = build_prompt(_window(3, start_id=0), profile)
    b = build_prompt(_window(3, start_id=50), profile)
    static_a, payload_a = a.user_text.split(TASK_HEADER)
    static_b, payload_b = b.user_text.split(TASK_HEADER)
    assert static_a == static_b
    assert payload_a != payload_b


def test_section_order(profile):
    text = build_prompt(_window(), profile).user_text
    markers = [
        profile.role_text,
        ROOMS_HEADER,
        profile.io_description,
        LABELS_HEADER,
        RULES_HEADER,
        EXAMPLE_INPUT_HEADER,
        TASK_HEADER,
    ]
    positions = [text.index(m) for m in markers]
    assert positions == sorted(positions)


def test_system_split_moves_static_sections(profile):
    window = _window()
    combined = build_prompt(window, profile)
    split_up = build_prompt(window, profile, split_system=True)
    assert combined.system_text == ""
    assert split_up.system_text
    assert window_to_json(window) in split_up.user_text
    assert ROOMS_HEADER not in split_up.user_text
    assert split_up.prompt_hash != combined.prompt_hash
