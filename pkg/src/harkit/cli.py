"""Command-line surface: reproducible, resumable experiment runs.

Commands: run, distill, ablate, report, synth, validate. Every command
reads plain JSON files and writes its artifacts under the directories named
in the config or flags; ``--json`` switches stdout to machine-readable
output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .distill import build_corpus, load_manifest, subset_by_sessions
from .errors import ConfigError, HarkitError
from .gateway import BackendConfig, RunStats
from .ingest import (
    GeneratorSpec,
    SplitPolicy,
    generate_synthetic,
    load_dataset,
    scan_violations,
    split,
    synthetic_profile,
    write_dataset,
)
from .model import load_profile, profile_to_json_obj
from .pipeline import execute_run
from .report import (
    emit_report,
    load_report_json,
    render_report_table,
    report_to_json_obj,
    write_report_json,
)


def _load_json(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return doc


def _split_policy_from_config(doc: dict, config_dir: Path) -> SplitPolicy:
    kind = doc.get("kind", "")
    if kind == "first-k-sessions":
        return SplitPolicy.first_k(int(doc["k"]))
    if kind == "per-scenario-session-split":
        manifest = _load_json(config_dir / str(doc["manifest"]))
        return SplitPolicy.per_scenario({str(k): str(v) for k, v in manifest.items()})
    if kind == "explicit-lists":
        return SplitPolicy.explicit(
            [str(s) for s in doc.get("train", [])], [str(s) for s in doc.get("test", [])]
        )
    raise ConfigError(f"unknown split kind {kind!r}")


def _backend_from_config(doc: dict, config_dir: Path) -> BackendConfig:
    allowed = {f for f in BackendConfig.__dataclass_fields__}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown backend config keys: {', '.join(sorted(unknown))}")
    if "kind" not in doc:
        raise ConfigError("backend config needs a 'kind'")
    # Path-valued fields resolve relative to the config file, like dataset
    # and profile, so an experiment directory is relocatable as a whole.
    for key in ("script", "replay_dir"):
        if doc.get(key):
            doc[key] = str(config_dir / doc[key])
    return BackendConfig(**doc)


def cmd_run(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    config = _load_json(config_path)
    config_dir = config_path.parent
    for key in ("dataset", "profile", "backend", "run_dir"):
        if key not in config:
            raise ConfigError(f"config lacks required key {key!r}")

    dataset_path = config_dir / str(config["dataset"])
    profile_path = config_dir / str(config["profile"])
    if not dataset_path.is_file():
        raise ConfigError(f"dataset file not found: {dataset_path}")
    profile = load_profile(profile_path)
    dataset = load_dataset(dataset_path, profile)

    window_size = int(config.get("window_size", 10))
    policy = _split_policy_from_config(config.get("split", {"kind": "first-k-sessions", "k": 0}),
                                       config_dir)
    train_ids, test_ids = split(dataset, policy)
    evaluate = str(config.get("evaluate", "test"))
    if evaluate not in ("train", "test"):
        raise ConfigError("config key 'evaluate' must be 'train' or 'test'")
    session_ids = train_ids if evaluate == "train" else test_ids
    if not session_ids:
        raise ConfigError(f"the {evaluate} split is empty under the configured policy")

    backend_cfg = _backend_from_config(dict(config["backend"]), config_dir)
    run_dir = config_dir / str(config["run_dir"])
    run_dir.mkdir(parents=True, exist_ok=True)

    report_opts = dict(config.get("report", {}))
    f1_variant = str(report_opts.get("f1_variant", "macro"))
    snapshot = dict(config)
    snapshot["dataset_name"] = dataset.name
    snapshot["train_sessions"] = train_ids
    snapshot["evaluated_sessions"] = list(session_ids)
    (run_dir / "config.json").write_text(
        json.dumps(snapshot, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    stats = RunStats()
    meta = {"f1_variant": f1_variant, "split": config.get("split"), "evaluate": evaluate}
    if "params_b" in report_opts:
        meta["params_b"] = report_opts["params_b"]
    report = execute_run(
        dataset, profile, session_ids, window_size, backend_cfg, run_dir, stats, meta
    )
    write_report_json(report, run_dir / "report.json")

    if args.json:
        print(json.dumps(report_to_json_obj(report), sort_keys=True))
    else:
        print(render_report_table(report, f1_variant))
        print(f"{stats.backend_calls} new inferences, {stats.loaded} loaded from store")
        print(f"report written to {run_dir / 'report.json'}")
    return 0


def cmd_distill(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    sessions: Optional[list[str]] = None
    if args.sessions:
        sessions = [s.strip() for s in args.sessions.split(",") if s.strip()]
    if sessions is None:
        snapshot_path = run_dir / "config.json"
        if not snapshot_path.is_file():
            raise ConfigError("no --sessions given and the run has no config snapshot")
        snapshot = _load_json(snapshot_path)
        sessions = [str(s) for s in snapshot.get("evaluated_sessions", [])]
    manifest = build_corpus(run_dir, sessions, args.out)
    payload = manifest.to_json_obj()
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"wrote {manifest.record_count} records from {len(manifest.sessions)} sessions "
              f"to {args.out}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    ks = [int(k.strip()) for k in args.ks.split(",") if k.strip()]
    if not ks:
        raise ConfigError("--ks must name at least one subset size")
    outputs = []
    for k in ks:
        out = subset_by_sessions(args.corpus, k)
        outputs.append({"k": k, "path": str(out), "records": load_manifest(out).record_count})
    if args.json:
        print(json.dumps(outputs, sort_keys=True))
    else:
        for item in outputs:
            print(f"k={item['k']}: {item['records']} records -> {item['path']}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    if not args.runs:
        raise ConfigError("no run reports given")
    reports = [load_report_json(path) for path in args.runs]
    ablation = _load_json(args.ablation) if args.ablation else None
    paths = emit_report(reports, args.out, f1_variant=args.f1, ablation=ablation)
    if args.json:
        print(json.dumps({name: str(path) for name, path in paths.items()}, sort_keys=True))
    else:
        for name, path in paths.items():
            print(f"{name}: {path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(
        sessions=args.sessions,
        events_per_session=args.events,
        residents=args.residents,
        dataset_name=args.name,
    )
    dataset = generate_synthetic(spec, seed=args.seed)
    write_dataset(dataset, args.out)
    profile = synthetic_profile(spec)
    Path(args.profile_out).write_text(
        json.dumps(profile_to_json_obj(profile), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    summary = {
        "events": dataset.n_events,
        "sessions": len(dataset.sessions),
        "dataset": str(args.out),
        "profile": str(args.profile_out),
    }
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"wrote {summary['events']} events across {summary['sessions']} sessions "
              f"to {args.out}; profile to {args.profile_out}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    profile = load_profile(args.profile)
    violations = scan_violations(args.dataset, profile)
    if args.json:
        print(json.dumps({"violations": violations}, sort_keys=True))
    else:
        if violations:
            for violation in violations:
                print(violation)
        else:
            print("ok")
    return 1 if violations else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harkit",
        description="Multi-resident activity recognition runs against chat LLM backends.",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a full pipeline run from a config file")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("distill", help="build a fine-tuning corpus from a teacher run")
    p.add_argument("--run", required=True, help="teacher run directory")
    p.add_argument("--out", required=True, help="corpus JSONL output path")
    p.add_argument("--sessions", default="", help="comma-separated session ids "
                   "(default: the sessions recorded in the run's config snapshot)")
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("ablate", help="emit first-k-session subsets of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ks", required=True, help="comma-separated subset sizes, e.g. 1,4,10,15")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="merge run reports into the CSV and charts")
    p.add_argument("runs", nargs="*", help="report.json files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--f1", default="macro", choices=["macro", "micro"])
    p.add_argument("--ablation", default="", help="optional ablation series JSON")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic multi-resident dataset")
    p.add_argument("--out", required=True, help="events JSONL output path")
    p.add_argument("--profile-out", required=True, help="profile JSON output path")
    p.add_argument("--sessions", type=int, default=3)
    p.add_argument("--events", type=int, default=40, help="events per session")
    p.add_argument("--residents", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="synthetic")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="lint a profile and dataset file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--profile", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HarkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
