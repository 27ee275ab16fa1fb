"""The training loop: frozen base, trainable adapters, next-token loss on
assistant content, fixed step budget."""

from __future__ import annotations

import logging
import random
from pathlib import Path

import torch
from torch.utils.data import DataLoader

from .config import FinetuneConfig, FinetuneReport, write_report
from .corpus import ChatDataset, collate, load_records
from .errors import ModelError, TracetuneError
from .lora import (
    base_weight_checksum,
    freeze_base,
    inject_adapters,
    parameter_counts,
    save_adapter,
)

log = logging.getLogger(__name__)

_DTYPES = {"float32": torch.float32, "bfloat16": torch.bfloat16, "float16": torch.float16}


def load_base(cfg: FinetuneConfig):
    """(tokenizer, model) for the configured student, with a clear error when
    the model is not available locally or from the hub."""
    from transformers import AutoModelForCausalLM, AutoTokenizer

    if cfg.dtype not in _DTYPES:
        raise ModelError(f"unknown dtype {cfg.dtype!r}; use one of {sorted(_DTYPES)}")
    try:
        tokenizer = AutoTokenizer.from_pretrained(cfg.base_model)
        model = AutoModelForCausalLM.from_pretrained(cfg.base_model, dtype=_DTYPES[cfg.dtype])
    except Exception as exc:
        raise ModelError(
            f"cannot load base model {cfg.base_model!r}: {exc}. Pass a local checkpoint "
            "directory or a model id that has been downloaded already."
        ) from exc
    if tokenizer.pad_token_id is None:
        tokenizer.pad_token = tokenizer.eos_token
    return tokenizer, model


def train(cfg: FinetuneConfig) -> tuple[FinetuneReport, Path]:
    """Run the fine-tune and return (report, adapter directory).

    The base weights are verified untouched by checksum; only the adapter
    matrices receive gradients. The learning-rate schedule decays linearly
    from the configured initial value to zero across the step budget.
    """
    torch.manual_seed(cfg.seed)
    random.seed(cfg.seed)

    records = load_records(cfg.corpus)
    tokenizer, model = load_base(cfg)
    model.train()
    if hasattr(model, "config"):
        model.config.use_cache = False

    freeze_base(model)
    checksum_before = base_weight_checksum(model)
    adapter_modules = inject_adapters(
        model, cfg.lora_rank, cfg.lora_alpha, cfg.lora_dropout, cfg.target_modules
    )
    trainable, base = parameter_counts(model)
    log.info("adapters on %d modules: %d trainable / %d frozen params (%.2f%%)",
             len(adapter_modules), trainable, base, 100.0 * trainable / base)

    dataset = ChatDataset(tokenizer, records, cfg.max_seq_len)
    loader = DataLoader(
        dataset,
        batch_size=cfg.batch_size,
        shuffle=True,
        generator=torch.Generator().manual_seed(cfg.seed),
        collate_fn=lambda batch: collate(batch, tokenizer.pad_token_id),
    )
    trainable_params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.AdamW(trainable_params, lr=cfg.learning_rate)
    schedule = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: max(0.0, 1.0 - step / cfg.max_steps)
    )

    final_loss = float("nan")
    steps = 0
    batches = cycle_batches(loader)
    try:
        while steps < cfg.max_steps:
            batch = next(batches)
            loss = model(**batch).loss
            loss.backward()
            optimizer.step()
            schedule.step()
            optimizer.zero_grad()
            steps += 1
            final_loss = loss.item()
            if steps % 50 == 0 or steps == cfg.max_steps:
                log.info("step %d/%d loss %.4f", steps, cfg.max_steps, final_loss)
    except torch.cuda.OutOfMemoryError as exc:
        raise TracetuneError(
            f"out of memory at step {steps + 1}: lower batch_size (now {cfg.batch_size}) or "
            f"max_seq_len (now {cfg.max_seq_len}), or use a smaller dtype"
        ) from exc

    checksum_after = base_weight_checksum(model)
    if checksum_after != checksum_before:
        raise TracetuneError("base weights changed during training; refusing to export")

    out_dir = Path(cfg.output_dir)
    adapter_dir = save_adapter(
        model, out_dir / "adapter", cfg.base_model, cfg.lora_rank, cfg.lora_alpha,
        cfg.lora_dropout, cfg.target_modules,
    )
    report = FinetuneReport(
        trainable_params=trainable,
        base_params=base,
        overhead_pct=100.0 * trainable / base,
        steps_run=steps,
        final_loss=final_loss,
        corpus_records=len(records),
        base_checksum=checksum_after,
        adapter_modules=tuple(adapter_modules),
    )
    write_report(report, out_dir / "report.json")
    return report, adapter_dir


def cycle_batches(loader: DataLoader):
    """Endless batches; each pass over the loader reshuffles."""
    while True:
        for batch in loader:
            yield batch
