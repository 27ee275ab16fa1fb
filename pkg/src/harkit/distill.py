"""Turn a completed teacher run into a supervised fine-tuning corpus.

Every training window becomes one chat record whose assistant turn is the
teacher's full completion, reasoning tags included and untruncated: students
are meant to learn the reasoning format itself. No quality filtering of any
kind is applied.

Corpus format: line-delimited JSON, one record per line,
``{"messages": [{"role": ..., "content": ...}, ...], "source": {...},
"teacher_model": ...}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .errors import CorpusError

FILTER_POLICY = "none"


@dataclass(frozen=True)
class CorpusManifest:
    """Sidecar metadata written next to every corpus file."""

    record_count: int
    sessions: tuple[str, ...]
    teacher_run_id: str
    dataset_name: str
    filter: str = FILTER_POLICY

    def to_json_obj(self) -> dict:
        return {
            "record_count": self.record_count,
            "sessions": list(self.sessions),
            "teacher_run_id": self.teacher_run_id,
            "dataset_name": self.dataset_name,
            "filter": self.filter,
        }


def manifest_path_for(corpus_path: str | Path) -> Path:
    corpus_path = Path(corpus_path)
    return corpus_path.with_name(corpus_path.name + ".manifest.json")


def _write_manifest(manifest: CorpusManifest, corpus_path: Path) -> None:
    manifest_path_for(corpus_path).write_text(
        json.dumps(manifest.to_json_obj(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_manifest(corpus_path: str | Path) -> CorpusManifest:
    path = manifest_path_for(corpus_path)
    if not path.is_file():
        raise CorpusError(f"no manifest next to corpus: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    return CorpusManifest(
        record_count=int(doc["record_count"]),
        sessions=tuple(doc["sessions"]),
        teacher_run_id=str(doc["teacher_run_id"]),
        dataset_name=str(doc["dataset_name"]),
        filter=str(doc.get("filter", FILTER_POLICY)),
    )


def read_corpus(path: str | Path) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def _scan_run_store(run_dir: Path) -> dict[str, list[tuple[int, Path]]]:
    """Map session_id -> [(window_id, window dir)] from a run store."""
    windows_dir = run_dir / "windows"
    if not windows_dir.is_dir():
        raise CorpusError(f"{run_dir} has no window store")
    by_session: dict[str, list[tuple[int, Path]]] = {}
    all_ids: list[int] = []
    for meta_path in windows_dir.glob("*/meta.json"):
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        window_id = int(meta["window_id"])
        all_ids.append(window_id)
        if meta.get("failure") == "transport-failed":
            raise CorpusError(
                f"window {window_id} (session {meta.get('session_id')}) is transport-failed; "
                "repair the teacher run before building a corpus"
            )
        by_session.setdefault(str(meta["session_id"]), []).append((window_id, meta_path.parent))
    if all_ids and sorted(all_ids) != list(range(min(all_ids), min(all_ids) + len(all_ids))):
        raise CorpusError(f"{run_dir} window store has gaps; the teacher run is incomplete")
    for windows in by_session.values():
        windows.sort()
    return by_session


def build_corpus(
    run_dir: str | Path,
    train_sessions: Sequence[str],
    out_path: str | Path,
    dataset_name: Optional[str] = None,
) -> CorpusManifest:
    """Write one chat record per training window, in (session, window) order.

    The session order of ``train_sessions`` (normally dataset order from the
    split) is preserved; it determines what "first k sessions" means for
    :func:`subset_by_sessions`.
    """
    run_dir = Path(run_dir)
    out_path = Path(out_path)
    if not train_sessions:
        raise CorpusError("empty training session list")

    snapshot = {}
    snapshot_path = run_dir / "config.json"
    if snapshot_path.is_file():
        snapshot = json.loads(snapshot_path.read_text(encoding="utf-8"))
    if dataset_name is None:
        dataset_name = str(snapshot.get("dataset_name", ""))

    by_session = _scan_run_store(run_dir)
    missing = [sid for sid in train_sessions if sid not in by_session]
    if missing:
        raise CorpusError(f"teacher run has no windows for sessions: {', '.join(missing)}")

    count = 0
    teacher_model = ""
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for session_id in train_sessions:
            for window_id, window_dir in by_session[session_id]:
                meta = json.loads((window_dir / "meta.json").read_text(encoding="utf-8"))
                prompt = (window_dir / "prompt.txt").read_text(encoding="utf-8")
                response = (window_dir / "response.txt").read_text(encoding="utf-8")
                teacher_model = str(meta.get("model", ""))
                messages = []
                if meta.get("system_text"):
                    messages.append({"role": "system", "content": meta["system_text"]})
                messages.append({"role": "user", "content": prompt})
                messages.append({"role": "assistant", "content": response})
                record = {
                    "messages": messages,
                    "source": {
                        "dataset": dataset_name,
                        "session_id": session_id,
                        "window_id": window_id,
                    },
                    "teacher_model": teacher_model,
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                count += 1

    manifest = CorpusManifest(
        record_count=count,
        sessions=tuple(train_sessions),
        teacher_run_id=run_dir.name,
        dataset_name=dataset_name,
    )
    _write_manifest(manifest, out_path)
    return manifest


def subset_by_sessions(
    corpus_path: str | Path, k: int, out_path: Optional[str | Path] = None
) -> Path:
    """Keep only records from the first ``k`` sessions of a corpus.

    Prefix-monotone: the k1 subset is contained in the k2 subset whenever
    k1 <= k2.
    """
    corpus_path = Path(corpus_path)
    manifest = load_manifest(corpus_path)
    if not 1 <= k <= len(manifest.sessions):
        raise CorpusError(f"k={k} out of range (corpus has {len(manifest.sessions)} sessions)")
    kept_sessions = manifest.sessions[:k]
    kept_set = set(kept_sessions)

    if out_path is None:
        stem = corpus_path.name[: -len(".jsonl")] if corpus_path.name.endswith(".jsonl") else corpus_path.name
        out_path = corpus_path.with_name(f"{stem}.k{k}.jsonl")
    out_path = Path(out_path)

    count = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for record in read_corpus(corpus_path):
            if record["source"]["session_id"] in kept_set:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                count += 1

    _write_manifest(
        CorpusManifest(
            record_count=count,
            sessions=kept_sessions,
            teacher_run_id=manifest.teacher_run_id,
            dataset_name=manifest.dataset_name,
        ),
        out_path,
    )
    return out_path
