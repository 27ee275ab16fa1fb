"""Chat-record corpus loading and tokenization.

A record is {"messages": [{"role": ..., "content": ...}, ...]} with exactly
one assistant message in final position; extra keys (source, teacher_model)
are ignored. The loss covers only the assistant content: prompt tokens are
masked out of the labels.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Sequence

import torch

from .errors import CorpusError

log = logging.getLogger(__name__)

IGNORE_INDEX = -100


def load_records(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"corpus not found: {path}")
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            messages = record.get("messages")
            if (
                not isinstance(messages, list)
                or not messages
                or messages[-1].get("role") != "assistant"
                or sum(1 for m in messages if m.get("role") == "assistant") != 1
            ):
                raise CorpusError(
                    f"{path}:{lineno}: record must hold messages ending in exactly one "
                    "assistant turn"
                )
            records.append(record)
    if not records:
        raise CorpusError(f"{path}: corpus is empty")
    return records


def encode_record(tokenizer, messages: list[dict], max_seq_len: int) -> tuple[list[int], list[int]]:
    """(input ids, labels) with prompt tokens masked to IGNORE_INDEX."""
    prompt_ids = tokenizer.apply_chat_template(
        messages[:-1], tokenize=True, add_generation_prompt=True, return_dict=False
    )
    full_ids = tokenizer.apply_chat_template(
        messages, tokenize=True, add_generation_prompt=False, return_dict=False
    )
    boundary = len(prompt_ids)
    if full_ids[:boundary] != prompt_ids:
        # Template without the prefix property; fall back to masking by
        # rendered-prompt length, clamped to leave at least one target token.
        boundary = min(boundary, len(full_ids) - 1)
    labels = [IGNORE_INDEX] * boundary + full_ids[boundary:]
    return full_ids[:max_seq_len], labels[:max_seq_len]


class ChatDataset(torch.utils.data.Dataset):
    def __init__(self, tokenizer, records: Sequence[dict], max_seq_len: int) -> None:
        encoded = [encode_record(tokenizer, record["messages"], max_seq_len) for record in records]
        # A record whose assistant region was cut off entirely has no target
        # tokens and would only poison the loss; drop it.
        self.encoded = [
            (ids, labels) for ids, labels in encoded
            if any(label != IGNORE_INDEX for label in labels)
        ]
        dropped = len(encoded) - len(self.encoded)
        if not self.encoded:
            raise CorpusError("every record truncates to prompt-only; raise max_seq_len")
        if dropped:
            log.warning("dropped %d of %d records truncated to prompt-only "
                        "(max_seq_len=%d)", dropped, len(encoded), max_seq_len)

    def __len__(self) -> int:
        return len(self.encoded)

    def __getitem__(self, index: int) -> tuple[list[int], list[int]]:
        return self.encoded[index]


def collate(batch: list[tuple[list[int], list[int]]], pad_token_id: int) -> dict[str, torch.Tensor]:
    width = max(len(ids) for ids, _ in batch)
    input_ids = torch.full((len(batch), width), pad_token_id, dtype=torch.long)
    labels = torch.full((len(batch), width), IGNORE_INDEX, dtype=torch.long)
    attention_mask = torch.zeros((len(batch), width), dtype=torch.long)
    for row, (ids, lab) in enumerate(batch):
        input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        labels[row, : len(lab)] = torch.tensor(lab, dtype=torch.long)
        attention_mask[row, : len(ids)] = 1
    return {"input_ids": input_ids, "labels": labels, "attention_mask": attention_mask}
