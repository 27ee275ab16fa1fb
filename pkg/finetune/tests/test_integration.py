"""Whole-workflow check against the recognition toolkit, coupled only through
the corpus file format: teacher run -> corpus -> 1-step fine-tune -> bundle."""

from __future__ import annotations

import json

import pytest

from tracetune.cli import main
from tracetune.config import FinetuneConfig
from tracetune.train import train

harkit = pytest.importorskip("harkit")

GROUND_TRUTH_MOCK = """\
import json

def respond(request):
    answer = [
        {"id": event_id, "activity": str(label)}
        for event_id, label in zip(request["event_ids"], request["truth"])
    ]
    return "<think>\\nscripted ground truth\\n</think>\\n" + json.dumps(answer)
"""


@pytest.fixture
def harkit_corpus(tmp_path):
    from harkit.distill import build_corpus
    from harkit.gateway import BackendConfig, run_windows
    from harkit.ingest import GeneratorSpec, generate_synthetic, synthetic_profile
    from harkit.pipeline import build_run_windows

    spec = GeneratorSpec(sessions=2, events_per_session=20, residents=2)
    dataset = generate_synthetic(spec, seed=9)
    profile = synthetic_profile(spec)
    windows = build_run_windows(dataset, dataset.session_ids, 10)
    script = tmp_path / "mock.py"
    script.write_text(GROUND_TRUTH_MOCK, encoding="utf-8")
    cfg = BackendConfig(kind="mock", script=str(script), model="teacher")
    run_dir = tmp_path / "teacher"
    run_windows(windows, profile, cfg, run_dir)
    corpus = tmp_path / "corpus.jsonl"
    build_corpus(run_dir, dataset.session_ids, corpus, dataset_name=dataset.name)
    return corpus


def test_train_on_recognition_toolkit_corpus(harkit_corpus, tiny_base_model, tmp_path):
    cfg = FinetuneConfig(
        base_model=tiny_base_model,
        corpus=str(harkit_corpus),
        output_dir=str(tmp_path / "student"),
        max_steps=2,
        lora_rank=4,
        lora_alpha=8,
        batch_size=2,
        max_seq_len=2048,
    )
    report, adapter_dir = train(cfg)
    assert report.corpus_records == 4  # 2 sessions x 2 windows of 10
    assert report.steps_run == 2
    assert (adapter_dir / "adapter_model.safetensors").is_file()


def test_cli_train_and_export(harkit_corpus, tiny_base_model, tmp_path, capsys):
    config = {
        "base_model": tiny_base_model,
        "corpus": str(harkit_corpus),
        "output_dir": str(tmp_path / "out"),
        "max_steps": 1,
        "lora_rank": 4,
        "lora_alpha": 8,
        "batch_size": 2,
        "max_seq_len": 2048,
    }
    config_path = tmp_path / "train.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    assert main(["train", "--config", str(config_path)]) == 0
    out = capsys.readouterr().out
    assert "overhead" in out

    assert main([
        "export",
        "--adapter", str(tmp_path / "out" / "adapter"),
        "--base", tiny_base_model,
        "--out", str(tmp_path / "bundle"),
    ]) == 0
    assert "--enable-lora" in capsys.readouterr().out
