"""Low-rank-adapter fine-tuning of small chat models on teacher-trace corpora.

File-interface driver: a line-delimited JSON chat corpus goes in, an adapter
directory plus a JSON report come out. The adapter follows the prevailing
open checkpoint layout so standard adapter-aware serving stacks can host the
result.
"""

from .config import ATTENTION_PROJECTIONS, FinetuneConfig, FinetuneReport, load_config
from .export import export_for_serving
from .lora import (
    LoRALinear,
    adapter_state_dict,
    base_weight_checksum,
    inject_adapters,
    parameter_counts,
    save_adapter,
)
from .train import train

__version__ = "0.1.0"

__all__ = [
    "ATTENTION_PROJECTIONS",
    "FinetuneConfig",
    "FinetuneReport",
    "LoRALinear",
    "adapter_state_dict",
    "base_weight_checksum",
    "export_for_serving",
    "inject_adapters",
    "load_config",
    "parameter_counts",
    "save_adapter",
    "train",
]
