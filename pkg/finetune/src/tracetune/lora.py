"""Low-rank adapters over frozen linear layers.

A wrapped unit computes base(x) + B(A(x)) * (alpha / rank) with the base
weights frozen; only A and B train. B starts at zero, so an injected model
is functionally identical to the base until the first optimizer step.
Adapters are saved in the prevailing adapter-checkpoint layout
(adapter_config.json + adapter_model.safetensors with base_model.model.*
tensor names), which adapter-aware serving stacks load directly.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Sequence

import torch
from safetensors.torch import load_file, save_file
from torch import nn

from .errors import ModelError

ADAPTER_CONFIG = "adapter_config.json"
ADAPTER_WEIGHTS = "adapter_model.safetensors"


class LoRALinear(nn.Module):
    def __init__(self, base: nn.Linear, rank: int, alpha: int, dropout: float = 0.0) -> None:
        super().__init__()
        self.base = base
        for param in self.base.parameters():
            param.requires_grad_(False)
        device, dtype = base.weight.device, base.weight.dtype
        self.lora_A = nn.Parameter(torch.empty(rank, base.in_features, device=device, dtype=dtype))
        self.lora_B = nn.Parameter(torch.empty(base.out_features, rank, device=device, dtype=dtype))
        self.scaling = alpha / rank
        self.dropout = nn.Dropout(dropout) if dropout > 0 else nn.Identity()
        if device.type != "meta":  # meta tensors are for parameter counting only
            nn.init.kaiming_uniform_(self.lora_A, a=math.sqrt(5))
            nn.init.zeros_(self.lora_B)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        update = nn.functional.linear(nn.functional.linear(self.dropout(x), self.lora_A), self.lora_B)
        return self.base(x) + update * self.scaling


def freeze_base(model: nn.Module) -> None:
    for param in model.parameters():
        param.requires_grad_(False)


def inject_adapters(
    model: nn.Module, rank: int, alpha: int, dropout: float, target_modules: Sequence[str]
) -> list[str]:
    """Replace every targeted nn.Linear with a LoRALinear; returns their names."""
    targets = set(target_modules)
    replaced: list[str] = []
    for name, module in list(model.named_modules()):
        leaf = name.rsplit(".", 1)[-1]
        if leaf in targets and isinstance(module, nn.Linear):
            parent = model.get_submodule(name.rsplit(".", 1)[0]) if "." in name else model
            setattr(parent, leaf, LoRALinear(module, rank, alpha, dropout))
            replaced.append(name)
    if not replaced:
        raise ModelError(
            f"no modules named {sorted(targets)} found in the base model; wrong architecture?"
        )
    return replaced


def parameter_counts(model: nn.Module) -> tuple[int, int]:
    """(trainable adapter params, frozen base params), shared tensors counted once."""
    trainable = sum(p.numel() for p in model.parameters() if p.requires_grad)
    base = sum(p.numel() for p in model.parameters() if not p.requires_grad)
    return trainable, base


def _is_adapter_param(name: str) -> bool:
    return "lora_A" in name or "lora_B" in name


def base_weight_checksum(model: nn.Module) -> str:
    """Digest of all non-adapter weights, stable across adapter injection."""
    digest = hashlib.sha256()
    for name, param in sorted(model.named_parameters()):
        if _is_adapter_param(name):
            continue
        digest.update(name.replace(".base.", ".").encode("utf-8"))
        data = param.detach().to(torch.float32).cpu().contiguous()
        digest.update(data.numpy().tobytes())
    return digest.hexdigest()


def adapter_state_dict(model: nn.Module) -> dict[str, torch.Tensor]:
    state = {}
    for name, param in model.named_parameters():
        if not _is_adapter_param(name):
            continue
        exported = "base_model.model." + name.replace(".lora_A", ".lora_A.weight").replace(
            ".lora_B", ".lora_B.weight"
        )
        state[exported] = param.detach().cpu().contiguous()
    return state


def save_adapter(
    model: nn.Module,
    out_dir: str | Path,
    base_model: str,
    rank: int,
    alpha: int,
    dropout: float,
    target_modules: Sequence[str],
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {
        "peft_type": "LORA",
        "task_type": "CAUSAL_LM",
        "base_model_name_or_path": base_model,
        "r": rank,
        "lora_alpha": alpha,
        "lora_dropout": dropout,
        "target_modules": sorted(target_modules),
        "bias": "none",
        "fan_in_fan_out": False,
        "inference_mode": True,
        "modules_to_save": None,
    }
    (out_dir / ADAPTER_CONFIG).write_text(
        json.dumps(config, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    save_file(adapter_state_dict(model), out_dir / ADAPTER_WEIGHTS)
    return out_dir


def load_adapter_config(adapter_dir: str | Path) -> dict:
    path = Path(adapter_dir) / ADAPTER_CONFIG
    if not path.is_file():
        raise ModelError(f"{adapter_dir} has no {ADAPTER_CONFIG}")
    return json.loads(path.read_text(encoding="utf-8"))


def load_adapter_weights(adapter_dir: str | Path) -> dict[str, torch.Tensor]:
    path = Path(adapter_dir) / ADAPTER_WEIGHTS
    if not path.is_file():
        raise ModelError(f"{adapter_dir} has no {ADAPTER_WEIGHTS}")
    return load_file(str(path))
