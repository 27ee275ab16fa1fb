"""End-to-end run orchestration shared by the CLI and the tests.

A run evaluates a set of sessions: textualize, segment, prompt, infer,
extract, score, aggregate. Window ids are re-numbered to be unique across
the whole run (the run store keys window directories by id); each window
keeps its session id.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Optional, Sequence

from .gateway import BackendConfig, RunStats, run_windows
from .ingest import Dataset
from .model import HomeProfile, SensorEvent, Window
from .scoring import DatasetReport, aggregate, complete_result, score_session
from .windows import segment, textualize


def session_windows(
    events: Sequence[SensorEvent], window_size: int, session_id: str
) -> list[Window]:
    texts = [textualize(e) for e in events]
    truth = [e.truth_label for e in events]
    return segment(texts, truth, window_size, session_id=session_id)


def build_run_windows(
    dataset: Dataset, session_ids: Sequence[str], window_size: int
) -> list[Window]:
    """All windows for the given sessions, with run-unique consecutive ids."""
    windows: list[Window] = []
    next_id = 0
    for session_id in session_ids:
        for w in session_windows(dataset.session(session_id), window_size, session_id):
            windows.append(
                Window(window_id=next_id, session_id=session_id, events=w.events, truth=w.truth)
            )
            next_id += 1
    return windows


def execute_run(
    dataset: Dataset,
    profile: HomeProfile,
    session_ids: Sequence[str],
    window_size: int,
    cfg: BackendConfig,
    run_dir: str | Path,
    stats: Optional[RunStats] = None,
    meta: Optional[Mapping[str, object]] = None,
) -> DatasetReport:
    """Run the whole pipeline over the given sessions and score it."""
    if stats is None:
        stats = RunStats()
    windows = build_run_windows(dataset, session_ids, window_size)
    results = run_windows(windows, profile, cfg, run_dir, stats)
    by_id = {w.window_id: w for w in windows}
    completed = [complete_result(r, by_id[r.window_id], profile.labels) for r in results]

    completed_by_id = {r.window_id: r for r in completed}
    metrics = []
    for session_id in session_ids:
        session_ws = [w for w in windows if w.session_id == session_id]
        session_rs = [completed_by_id[w.window_id] for w in session_ws]
        metrics.append(score_session(session_ws, session_rs, profile.labels))

    run_meta = {
        "dataset_name": dataset.name,
        "window_size": window_size,
        "n_windows": len(windows),
        "sessions": list(session_ids),
    }
    if meta:
        run_meta.update(meta)
    model = getattr(stats, "model", "") or cfg.model
    return aggregate(metrics, model=model, meta=run_meta)
