from __future__ import annotations

import json
from pathlib import Path

import pytest

from harkit.cli import main

from .conftest import DROP_TENTH_MOCK, GROUND_TRUTH_MOCK


def _experiment(tmp_path: Path, mock_source: str, run_name: str = "run",
                evaluate: str = "test", k: int = 1) -> Path:
    """Synthesize a dataset and write a ready-to-run experiment config."""
    assert main([
        "synth",
        "--out", str(tmp_path / "events.jsonl"),
        "--profile-out", str(tmp_path / "profile.json"),
        "--sessions", "3", "--events", "30", "--residents", "3", "--seed", "21",
    ]) == 0
    (tmp_path / "mock.py").write_text(mock_source, encoding="utf-8")
    config = {
        "dataset": "events.jsonl",
        "profile": "profile.json",
        "split": {"kind": "first-k-sessions", "k": k},
        "window_size": 10,
        "evaluate": evaluate,
        "backend": {"kind": "mock", "script": str(tmp_path / "mock.py"), "model": "mock"},
        "run_dir": run_name,
        "report": {"f1_variant": "macro", "params_b": 0.6},
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return config_path


def test_synth_and_validate(tmp_path, capsys):
    assert main([
        "synth", "--out", str(tmp_path / "e.jsonl"), "--profile-out", str(tmp_path / "p.json"),
    ]) == 0
    assert main([
        "validate", "--dataset", str(tmp_path / "e.jsonl"), "--profile", str(tmp_path / "p.json"),
    ]) == 0
    assert capsys.readouterr().out.strip().endswith("ok")


def test_validate_reports_violations(tmp_path, capsys):
    main(["synth", "--out", str(tmp_path / "e.jsonl"), "--profile-out", str(tmp_path / "p.json")])
    with open(tmp_path / "e.jsonl", "a", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "session": "syn00", "ts": "2021-03-04T09:00:00", "room": "attic",
            "sensor": "x", "kind": "OPENED", "label": 1,
        }) + "\n")
    assert main([
        "validate", "--dataset", str(tmp_path / "e.jsonl"), "--profile", str(tmp_path / "p.json"),
    ]) == 1
    assert "attic" in capsys.readouterr().out


def test_run_ground_truth_mock_prints_perfect_f1(tmp_path, capsys):
    config = _experiment(tmp_path, GROUND_TRUTH_MOCK)
    assert main(["run", "--config", str(config)]) == 0
    out = capsys.readouterr().out
    assert "mean f1_macro 1.0000" in out
    assert "mean f1_micro 1.0000" in out
    assert (tmp_path / "run" / "report.json").is_file()
    assert (tmp_path / "run" / "config.json").is_file()


def test_run_resume_logs_zero_new_inferences(tmp_path, capsys):
    config = _experiment(tmp_path, GROUND_TRUTH_MOCK)
    assert main(["run", "--config", str(config)]) == 0
    capsys.readouterr()
    assert main(["run", "--config", str(config)]) == 0
    assert "0 new inferences" in capsys.readouterr().out


def test_run_dropout_mock_reports_missed_pct(tmp_path):
    config = _experiment(tmp_path, DROP_TENTH_MOCK)
    assert main(["--json", "run", "--config", str(config)]) == 0
    doc = json.loads((tmp_path / "run" / "report.json").read_text(encoding="utf-8"))
    assert doc["missed_mean"] == pytest.approx(10.0)


def test_run_missing_config_key(tmp_path, capsys):
    (tmp_path / "bad.json").write_text(json.dumps({"dataset": "x"}), encoding="utf-8")
    assert main(["run", "--config", str(tmp_path / "bad.json")]) == 1
    assert "error:" in capsys.readouterr().err


def test_run_survives_total_backend_failure(tmp_path):
    """Backend flakiness degrades into missed events, never a nonzero exit."""
    config_path = _experiment(tmp_path, GROUND_TRUTH_MOCK)
    config = json.loads(config_path.read_text(encoding="utf-8"))
    config["backend"] = {
        "kind": "http", "endpoint": "http://127.0.0.1:9", "model": "unreachable",
        "max_retries": 0, "timeout": 0.5, "backoff_initial": 0.01,
    }
    config_path.write_text(json.dumps(config), encoding="utf-8")
    assert main(["--json", "run", "--config", str(config_path)]) == 0
    doc = json.loads((tmp_path / "run" / "report.json").read_text(encoding="utf-8"))
    assert doc["missed_mean"] == 100.0
    assert doc["mean_f1_micro"] == 0.0


def test_distill_ablate_report_flow(tmp_path, capsys):
    # Teacher run over the training split.
    config = _experiment(tmp_path, GROUND_TRUTH_MOCK, run_name="teacher",
                         evaluate="train", k=2)
    assert main(["run", "--config", str(config)]) == 0

    corpus = tmp_path / "corpus.jsonl"
    assert main(["distill", "--run", str(tmp_path / "teacher"), "--out", str(corpus)]) == 0
    assert corpus.is_file()

    capsys.readouterr()
    assert main(["--json", "ablate", "--corpus", str(corpus), "--ks", "1,2"]) == 0
    items = json.loads(capsys.readouterr().out)
    assert [item["k"] for item in items] == [1, 2]
    subset_records = Path(items[0]["path"]).read_text(encoding="utf-8").splitlines()
    full_records = Path(items[1]["path"]).read_text(encoding="utf-8").splitlines()
    assert set(subset_records) <= set(full_records)

    report_path = tmp_path / "teacher" / "report.json"
    assert main(["report", str(report_path), "--out", str(tmp_path / "summary")]) == 0
    assert (tmp_path / "summary" / "summary.csv").is_file()
    assert (tmp_path / "summary" / "f1_vs_params.svg").is_file()


def test_report_with_no_runs_fails(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path / "summary")]) == 1
    assert "error" in capsys.readouterr().err


def test_distill_without_snapshot_needs_sessions(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["distill", "--run", str(tmp_path / "empty"), "--out", str(tmp_path / "c.jsonl")]) == 1


def test_run_artifacts_byte_identical_across_locations(tmp_path):
    """The same experiment directory, relocated, produces the same bytes."""
    import shutil

    source = tmp_path / "site-a"
    source.mkdir()
    assert main([
        "synth",
        "--out", str(source / "events.jsonl"),
        "--profile-out", str(source / "profile.json"),
        "--sessions", "3", "--events", "25", "--residents", "2", "--seed", "8",
    ]) == 0
    (source / "mock.py").write_text(GROUND_TRUTH_MOCK, encoding="utf-8")
    config = {
        "dataset": "events.jsonl",
        "profile": "profile.json",
        "split": {"kind": "first-k-sessions", "k": 1},
        "window_size": 10,
        "backend": {"kind": "mock", "script": "mock.py", "model": "mock"},
        "run_dir": "run",
        "report": {"f1_variant": "macro"},
    }
    (source / "config.json").write_text(json.dumps(config), encoding="utf-8")

    mirror = tmp_path / "site-b"
    shutil.copytree(source, mirror)
    assert main(["run", "--config", str(source / "config.json")]) == 0
    assert main(["run", "--config", str(mirror / "config.json")]) == 0

    files_a = sorted(p.relative_to(source / "run") for p in (source / "run").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(mirror / "run") for p in (mirror / "run").rglob("*") if p.is_file())
    assert files_a == files_b
    for relative in files_a:
        assert (source / "run" / relative).read_bytes() == (mirror / "run" / relative).read_bytes(), relative
