from __future__ import annotations

import pytest

from harkit.gateway import BackendConfig
from harkit.ingest import GeneratorSpec, generate_synthetic, synthetic_profile
from harkit.pipeline import build_run_windows, execute_run

from .conftest import GROUND_TRUTH_MOCK


def test_run_windows_are_globally_numbered():
    spec = GeneratorSpec(sessions=3, events_per_session=25)
    dataset = generate_synthetic(spec, seed=1)
    windows = build_run_windows(dataset, dataset.session_ids, 10)
    assert [w.window_id for w in windows] == list(range(9))
    assert [w.session_id for w in windows] == ["syn00"] * 3 + ["syn01"] * 3 + ["syn02"] * 3
    # event ids stay session-scoped
    assert windows[3].events[0].id == 0


@pytest.mark.parametrize("seed,sessions,events,residents", [
    (0, 3, 40, 4),
    (1, 1, 7, 1),
    (2, 5, 23, 2),
    (3, 2, 61, 3),
    (4, 4, 10, 4),
])
def test_ground_truth_mock_scores_perfectly(tmp_path, write_mock_script, seed, sessions,
                                            events, residents):
    """Whatever the synthetic home looks like, echoing the truth scores 1.0."""
    spec = GeneratorSpec(sessions=sessions, events_per_session=events, residents=residents)
    dataset = generate_synthetic(spec, seed=seed)
    profile = synthetic_profile(spec)
    script = write_mock_script(GROUND_TRUTH_MOCK)
    cfg = BackendConfig(kind="mock", script=str(script), model="mock")
    report = execute_run(dataset, profile, dataset.session_ids, 10, cfg, tmp_path / "run")
    assert report.mean_f1_macro == 1.0
    assert report.mean_f1_micro == 1.0
    assert report.missed_summary == "0.00 ± 0.00"
    assert all(m.n_wrong == 0 for m in report.sessions)
