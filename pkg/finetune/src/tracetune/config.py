"""Training configuration and the report emitted after a run.

Defaults: 500 optimizer steps at an initial learning rate of 2e-4 decaying
linearly to zero, adapters on the attention projections only. The effective
batch size of 8 makes 500 steps correspond to roughly 32 epochs of a
126-record corpus (and 8 of a 544-record one); rank 64 puts the trainable
overhead of a 0.6B-class student near 3%. All of these are plain config
keys, so a run can pin whatever recipe it needs.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError

ATTENTION_PROJECTIONS = ("q_proj", "k_proj", "v_proj", "o_proj")


@dataclass(frozen=True)
class FinetuneConfig:
    base_model: str
    corpus: str
    output_dir: str
    max_steps: int = 500
    learning_rate: float = 2e-4
    lora_rank: int = 64
    lora_alpha: int = 64
    lora_dropout: float = 0.0
    target_modules: tuple[str, ...] = ATTENTION_PROJECTIONS
    batch_size: int = 8
    max_seq_len: int = 4096
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.lora_rank < 1 or self.lora_alpha < 1:
            raise ConfigError("lora_rank and lora_alpha must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not self.target_modules:
            raise ConfigError("target_modules must name at least one module")


def load_config(path: str | Path) -> FinetuneConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    known = set(FinetuneConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(sorted(unknown))}")
    missing = {"base_model", "corpus", "output_dir"} - set(doc)
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(sorted(missing))}")
    if "target_modules" in doc:
        doc["target_modules"] = tuple(doc["target_modules"])
    try:
        return FinetuneConfig(**doc)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class FinetuneReport:
    """What a training run produced, written as JSON next to the adapter."""

    trainable_params: int
    base_params: int
    overhead_pct: float
    steps_run: int
    final_loss: float
    corpus_records: int
    base_checksum: str
    adapter_modules: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        expected = 100.0 * self.trainable_params / self.base_params
        if abs(expected - self.overhead_pct) > 1e-9:
            raise ValueError(
                f"inconsistent overhead: stored {self.overhead_pct}, recomputed {expected}"
            )

    def to_json_obj(self) -> dict:
        doc = asdict(self)
        doc["adapter_modules"] = list(self.adapter_modules)
        return doc


def write_report(report: FinetuneReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_json_obj(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
