"""Package a trained adapter for serving behind an OpenAI-compatible endpoint."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

from .errors import ExportError
from .lora import ADAPTER_CONFIG, ADAPTER_WEIGHTS, load_adapter_config

RECIPE_NAME = "SERVE.txt"


def serving_recipe(base_model: str, adapter_dir: Path, served_name: str = "student") -> str:
    return (
        "Serve the fine-tuned student behind an OpenAI-compatible endpoint:\n"
        "\n"
        f"    vllm serve {base_model} \\\n"
        "        --enable-lora \\\n"
        f"        --lora-modules {served_name}={adapter_dir}\n"
        "\n"
        f'Then point a backend config at it with "model": "{served_name}", e.g.\n'
        "\n"
        "    {\n"
        '      "kind": "http",\n'
        '      "endpoint": "http://localhost:8000",\n'
        f'      "model": "{served_name}"\n'
        "    }\n"
    )


def export_for_serving(
    adapter_dir: str | Path, base_model: str, out_dir: str | Path
) -> Path:
    """Copy the adapter into a self-contained bundle with a serving recipe.

    Refuses mismatched pairs: the adapter records the base model it was
    trained on.
    """
    adapter_dir = Path(adapter_dir)
    config = load_adapter_config(adapter_dir)
    trained_on = config.get("base_model_name_or_path", "")
    if trained_on != base_model:
        raise ExportError(
            f"adapter was trained on {trained_on!r}, not {base_model!r}; refusing to bundle"
        )

    out_dir = Path(out_dir)
    bundle_adapter = out_dir / "adapter"
    bundle_adapter.mkdir(parents=True, exist_ok=True)
    for name in (ADAPTER_CONFIG, ADAPTER_WEIGHTS):
        source = adapter_dir / name
        if not source.is_file():
            raise ExportError(f"adapter is incomplete: missing {name}")
        shutil.copy2(source, bundle_adapter / name)

    manifest = {
        "base_model": base_model,
        "adapter": "adapter",
        "rank": config.get("r"),
        "alpha": config.get("lora_alpha"),
        "target_modules": config.get("target_modules"),
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    recipe = serving_recipe(base_model, bundle_adapter.resolve())
    (out_dir / RECIPE_NAME).write_text(recipe, encoding="utf-8")
    return out_dir
