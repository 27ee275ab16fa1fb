"""Command-line entry points: ``tracetune train`` and ``tracetune export``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from .config import load_config
from .errors import TracetuneError
from .export import RECIPE_NAME, export_for_serving
from .train import train


def cmd_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    report, adapter_dir = train(cfg)
    print(f"adapter written to {adapter_dir}")
    print(f"report written to {Path(cfg.output_dir) / 'report.json'}")
    print(
        f"{report.trainable_params} trainable / {report.base_params} base params "
        f"({report.overhead_pct:.2f}% overhead), {report.steps_run} steps, "
        f"final loss {report.final_loss:.4f}"
    )
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    bundle = export_for_serving(args.adapter, args.base, args.out)
    print(f"bundle written to {bundle}")
    print((bundle / RECIPE_NAME).read_text(encoding="utf-8"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracetune",
        description="Low-rank-adapter fine-tuning of small chat models on teacher-trace corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune a student model from a config file")
    p.add_argument("--config", required=True, help="training config JSON")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("export", help="bundle a trained adapter for serving")
    p.add_argument("--adapter", required=True, help="adapter directory from a training run")
    p.add_argument("--base", required=True, help="base model the adapter was trained on")
    p.add_argument("--out", required=True, help="bundle output directory")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TracetuneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
