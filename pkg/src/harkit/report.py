"""Report serialization, CSV summaries, and the two standard charts.

Charts are written as SVG with a fixed hash salt so repeated runs produce
stable files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "harkit"

from .scoring import DatasetReport, SessionMetrics  # noqa: E402

CSV_COLUMNS = ["model", "params_b", "dataset", "f1", "missed_mean", "missed_std"]


def report_to_json_obj(report: DatasetReport) -> dict:
    return {
        "model": report.model,
        "mean_f1_macro": report.mean_f1_macro,
        "mean_f1_micro": report.mean_f1_micro,
        "missed_mean": report.missed_mean,
        "missed_std": report.missed_std,
        "missed_summary": report.missed_summary,
        "sessions": [
            {
                "session_id": m.session_id,
                "n_events": m.n_events,
                "n_correct": m.n_correct,
                "n_wrong": m.n_wrong,
                "n_missed": m.n_missed,
                "missed_pct": m.missed_pct,
                "f1_macro": m.f1_macro,
                "f1_micro": m.f1_micro,
                "per_label_counts": {
                    str(label): list(counts) for label, counts in sorted(m.per_label_counts.items())
                },
            }
            for m in report.sessions
        ],
        "meta": dict(report.meta),
    }


def report_json_bytes(report: DatasetReport) -> bytes:
    return (json.dumps(report_to_json_obj(report), sort_keys=True, indent=2) + "\n").encode("utf-8")


def write_report_json(report: DatasetReport, path: str | Path) -> None:
    Path(path).write_bytes(report_json_bytes(report))


def load_report_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def report_from_json_obj(doc: Mapping) -> DatasetReport:
    sessions = tuple(
        SessionMetrics(
            session_id=s["session_id"],
            n_events=s["n_events"],
            n_correct=s["n_correct"],
            n_wrong=s["n_wrong"],
            n_missed=s["n_missed"],
            f1_macro=s["f1_macro"],
            f1_micro=s["f1_micro"],
            per_label_counts={
                int(label): tuple(counts) for label, counts in s["per_label_counts"].items()
            },
        )
        for s in doc["sessions"]
    )
    return DatasetReport(
        sessions=sessions,
        mean_f1_macro=doc["mean_f1_macro"],
        mean_f1_micro=doc["mean_f1_micro"],
        missed_mean=doc["missed_mean"],
        missed_std=doc["missed_std"],
        model=doc.get("model", ""),
        meta=doc.get("meta", {}),
    )


def render_report_table(report: DatasetReport, f1_variant: str = "macro") -> str:
    """The human-readable per-session table printed after a run."""
    lines = [
        f"{'session':<16} {'events':>7} {'correct':>8} {'wrong':>6} {'missed':>7} "
        f"{'missed%':>8} {'f1_macro':>9} {'f1_micro':>9}"
    ]
    for m in report.sessions:
        lines.append(
            f"{m.session_id:<16} {m.n_events:>7} {m.n_correct:>8} {m.n_wrong:>6} "
            f"{m.n_missed:>7} {m.missed_pct:>8.2f} {m.f1_macro:>9.4f} {m.f1_micro:>9.4f}"
        )
    lines.append(
        f"mean f1_macro {report.mean_f1_macro:.4f} | mean f1_micro {report.mean_f1_micro:.4f} | "
        f"missed {report.missed_summary} (headline variant: {f1_variant})"
    )
    return "\n".join(lines)


def _rows_from_reports(reports: Sequence[Mapping], f1_variant: str) -> list[dict]:
    rows = []
    for doc in reports:
        meta = doc.get("meta", {})
        if "params_b" not in meta:
            raise ValueError(
                f"report for model {doc.get('model', '?')!r} lacks meta.params_b "
                "(parameter count in billions)"
            )
        rows.append(
            {
                "model": doc.get("model", ""),
                "params_b": float(meta["params_b"]),
                "dataset": meta.get("dataset_name", ""),
                "f1": float(doc[f"mean_f1_{f1_variant}"]),
                "missed_mean": float(doc["missed_mean"]),
                "missed_std": float(doc["missed_std"]),
            }
        )
    return rows


def build_size_figure(rows: Sequence[Mapping]) -> "plt.Figure":
    """F1 versus parameter count, one series per dataset, x-axis to scale."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_dataset: dict[str, list[Mapping]] = {}
    for row in rows:
        by_dataset.setdefault(str(row["dataset"]), []).append(row)
    for dataset, points in sorted(by_dataset.items()):
        points = sorted(points, key=lambda r: r["params_b"])
        ax.plot(
            [p["params_b"] for p in points],
            [p["f1"] for p in points],
            marker="o",
            label=dataset or "dataset",
        )
    ax.set_xlabel("parameters (billions)")
    ax.set_ylabel("F1-score")
    ax.set_ylim(bottom=0)
    ax.legend()
    fig.tight_layout()
    return fig


def build_ablation_figure(
    points: Sequence[tuple[int, float]], baselines: Mapping[str, float]
) -> "plt.Figure":
    """F1 versus number of fine-tuning sessions, with reference lines."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    points = sorted(points)
    ax.plot([k for k, _ in points], [f1 for _, f1 in points], marker="o")
    for name, value in sorted(baselines.items()):
        ax.axhline(value, linestyle="--", linewidth=1.2)
        ax.annotate(name, xy=(0.02, value), xycoords=("axes fraction", "data"),
                    xytext=(0, 3), textcoords="offset points", fontsize=8)
    ax.set_xlabel("sessions used for fine-tuning")
    ax.set_ylabel("F1-score")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    return fig


def emit_report(
    reports: Sequence[Mapping],
    out_dir: str | Path,
    f1_variant: str = "macro",
    ablation: Optional[Mapping] = None,
) -> dict[str, Path]:
    """Write the summary CSV and charts for a set of run reports.

    ``reports`` are report JSON objects (see :func:`report_to_json_obj`),
    each annotated with ``meta.params_b``. ``ablation``, when given, is
    ``{"points": [[k, f1], ...], "baselines": {name: f1, ...}}``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = _rows_from_reports(reports, f1_variant)

    csv_path = out_dir / "summary.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "missed_mean": f"{row['missed_mean']:.2f}",
                             "missed_std": f"{row['missed_std']:.2f}"})

    paths = {"csv": csv_path}
    fig = build_size_figure(rows)
    size_path = out_dir / "f1_vs_params.svg"
    fig.savefig(size_path, metadata={"Date": None})
    plt.close(fig)
    paths["size_chart"] = size_path

    if ablation is not None:
        fig = build_ablation_figure(
            [(int(k), float(f1)) for k, f1 in ablation.get("points", [])],
            {str(k): float(v) for k, v in ablation.get("baselines", {}).items()},
        )
        ablation_path = out_dir / "f1_vs_sessions.svg"
        fig.savefig(ablation_path, metadata={"Date": None})
        plt.close(fig)
        paths["ablation_chart"] = ablation_path
    return paths
