"""Sensor-event textualization and fixed-size window segmentation.

Pure functions over :mod:`harkit.model` types; safe to run per session in
parallel.
"""

from __future__ import annotations

import json
from typing import Sequence

from .errors import UnknownEventKindError
from .model import EventKind, SensorEvent, TextualizedEvent, Window

# One wording per transition kind, shared by every dataset. VALUE events
# render their payload string instead (a wattmeter reading, a setpoint, ...).
TRANSITION_TEXT: dict[EventKind, str] = {
    EventKind.TURNED_ON: "turned ON",
    EventKind.TURNED_OFF: "turned OFF",
    EventKind.OPENED: "OPENED",
    EventKind.CLOSED: "CLOSED",
    EventKind.PRESSURE_ON: "pressure ON",
    EventKind.PRESSURE_OFF: "pressure OFF",
}


def textualize(event: SensorEvent) -> TextualizedEvent:
    """Turn a raw event into its id/time/description form.

    The description is ``"<room> <sensor> <transition text>"`` with single
    spaces; time keeps only the wall clock (HH:mm:ss, 24-hour), so windows
    spanning midnight lose day information by design.
    """
    if event.event_kind is EventKind.VALUE:
        if event.value is None:
            raise UnknownEventKindError(
                f"event {event.session_id}/{event.seq}: kind 'value' requires a value string"
            )
        transition = event.value
    else:
        try:
            transition = TRANSITION_TEXT[event.event_kind]
        except KeyError:
            raise UnknownEventKindError(
                f"event {event.session_id}/{event.seq}: no transition text for kind {event.event_kind!r}"
            ) from None
    return TextualizedEvent(
        id=event.seq,
        time=event.timestamp.strftime("%H:%M:%S"),
        event=f"{event.room} {event.sensor} {transition}",
    )


def segment(
    events: Sequence[TextualizedEvent],
    truth: Sequence[int],
    window_size: int,
    session_id: str = "",
) -> list[Window]:
    """Split a session into non-overlapping windows of ``window_size`` events.

    Produces ceil(N / W) windows with consecutive ids starting at 0; every
    window has exactly W events except possibly the last. The final short
    window is kept: dropping it would leave its events unscored.
    """
    if window_size < 1:
        raise ValueError(f"window_size must be >= 1, got {window_size}")
    if len(events) != len(truth):
        raise ValueError(f"{len(events)} events but {len(truth)} truth labels")
    return [
        Window(
            window_id=wid,
            session_id=session_id,
            events=tuple(events[start : start + window_size]),
            truth=tuple(truth[start : start + window_size]),
        )
        for wid, start in enumerate(range(0, len(events), window_size))
    ]


def window_to_json(window: Window) -> str:
    """Serialize a window's events as the JSON array sent in prompts.

    Field order is fixed (id, time, event) and the output is byte
    deterministic: compact one-line objects, one per line inside the array.
    """
    lines = ",\n".join(
        json.dumps(e.to_json_obj(), separators=(",", ":"), ensure_ascii=False)
        for e in window.events
    )
    return f"[{lines}]"
