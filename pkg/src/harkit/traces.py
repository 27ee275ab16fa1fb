"""Reasoning-trace delimitation for completions from reasoning-tuned models.

Such models wrap their deliberation in paired ``<think>`` tags before the
final answer. The raw completion is always kept whole; these helpers only
locate the segments.
"""

from __future__ import annotations

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"


def first_trace(text: str) -> str:
    """Content of the first think-delimited segment, or "".

    A truncated completion may never close the tag; everything after the
    opening tag then counts as the trace.
    """
    start = text.find(THINK_OPEN)
    if start == -1:
        return ""
    start += len(THINK_OPEN)
    end = text.find(THINK_CLOSE, start)
    return text[start:] if end == -1 else text[start:end]


def strip_traces(text: str) -> str:
    """Remove every think-delimited segment, tags included.

    An unclosed opening tag swallows the rest of the text, matching how a
    truncated reasoning stream carries no answer.
    """
    out: list[str] = []
    pos = 0
    while True:
        start = text.find(THINK_OPEN, pos)
        if start == -1:
            out.append(text[pos:])
            return "".join(out)
        out.append(text[pos:start])
        end = text.find(THINK_CLOSE, start + len(THINK_OPEN))
        if end == -1:
            return "".join(out)
        pos = end + len(THINK_CLOSE)
