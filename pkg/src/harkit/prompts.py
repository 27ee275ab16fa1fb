"""Prompt assembly for one window against a home profile.

The same profile and window always produce the same bytes, whatever model is
queried, so scores of different model sizes stay comparable. Six sections in
fixed order: role, rooms, input/output format, label vocabulary, optional
rules, structural example; then the window payload.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .model import HomeProfile, Window
from .windows import window_to_json

ROOMS_HEADER = "The home has the following rooms:"
LABELS_HEADER = "Possible activity labels:"
RULES_HEADER = "Rules:"
EXAMPLE_INPUT_HEADER = "Example of an input:"
EXAMPLE_OUTPUT_HEADER = "Example of an expected output:"
TASK_HEADER = "Sensor events to classify:"


@dataclass(frozen=True)
class PromptText:
    """A ready-to-send prompt. ``system_text`` is empty unless a run opts in
    to a separate system message."""

    system_text: str
    user_text: str
    prompt_hash: str


def compute_prompt_hash(system_text: str, user_text: str) -> str:
    digest = hashlib.sha256()
    digest.update(system_text.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(user_text.encode("utf-8"))
    return digest.hexdigest()


def expected_output_schema(profile: HomeProfile) -> str:
    """The answer-format instruction embedded in every prompt.

    The "id"/"activity" key names are this toolkit's convention; the answer
    parser also accepts "label" as an alias.
    """
    return (
        "Answer with a JSON list containing one object per input sensor event, "
        'of the form {"id": <event id>, "activity": "<activity label>"}. '
        "Use the activity labels exactly as listed."
    )


def build_prompt(window: Window, profile: HomeProfile, split_system: bool = False) -> PromptText:
    """Assemble the prompt for one window.

    With ``split_system`` the static sections move to the system message and
    only the window payload stays in the user message; the default keeps
    everything in one user message.
    """
    rooms = "\n".join(f"- {name}: {appliances}" for name, appliances in profile.rooms)
    labels = "\n".join(lab.render() for lab in profile.labels)
    sections = [
        profile.role_text,
        f"{ROOMS_HEADER}\n{rooms}",
        f"{profile.io_description}\n{expected_output_schema(profile)}",
        f"{LABELS_HEADER}\n{labels}",
    ]
    if profile.rules:
        rules = "\n".join(f"- {rule}" for rule in profile.rules)
        sections.append(f"{RULES_HEADER}\n{rules}")
    example_in, example_out = profile.static_example
    sections.append(
        f"{EXAMPLE_INPUT_HEADER}\n{example_in}\n{EXAMPLE_OUTPUT_HEADER}\n{example_out}"
    )
    static_text = "\n\n".join(sections)
    payload = f"{TASK_HEADER}\n{window_to_json(window)}"

    if split_system:
        system_text, user_text = static_text, payload
    else:
        system_text, user_text = "", f"{static_text}\n\n{payload}"
    return PromptText(
        system_text=system_text,
        user_text=user_text,
        prompt_hash=compute_prompt_hash(system_text, user_text),
    )
