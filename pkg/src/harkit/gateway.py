"""Prompt execution against an OpenAI-compatible endpoint, a scripted mock,
or a replay store, with retries, bounded concurrency, and a resumable
on-disk run store.

Run store layout: ``run_dir/windows/<window_id>/{prompt.txt,response.txt,
meta.json}``. Writes for one window are atomic (write to a temp directory,
then rename), so a killed run never leaves half a window behind.
"""

from __future__ import annotations

import importlib.util
import json
import logging
import os
import shutil
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import httpx

from .errors import BackendError, ReplayMissError
from .model import FailureKind, HomeProfile, InferenceResult, Window
from .prompts import PromptText, build_prompt
from .traces import THINK_CLOSE, THINK_OPEN, first_trace

log = logging.getLogger(__name__)

HTTP = "http"
MOCK = "mock"
REPLAY = "replay"

CHAT_COMPLETIONS_PATH = "/v1/chat/completions"


@dataclass(frozen=True)
class BackendConfig:
    """Where and how to run prompts.

    ``endpoint`` is the server base URL (the chat-completions path is
    appended unless already present). ``script`` points at a Python file
    defining ``respond(request: dict) -> str`` for the mock backend;
    ``replay_dir`` at a completed run directory for the replay backend.
    """

    kind: str
    endpoint: str = ""
    model: str = ""
    temperature: float = 0.0
    max_tokens: int = 8192
    script: str = ""
    replay_dir: str = ""
    max_retries: int = 3
    backoff_initial: float = 0.5
    backoff_multiplier: float = 2.0
    max_in_flight: int = 4
    timeout: float = 120.0
    api_key_env: str = "OPENAI_API_KEY"
    system_split: bool = False

    def __post_init__(self) -> None:
        if self.kind not in (HTTP, MOCK, REPLAY):
            raise BackendError(f"unknown backend kind {self.kind!r}")
        if self.max_retries < 0:
            raise BackendError("max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise BackendError("max_in_flight must be >= 1")


@dataclass
class RunStats:
    """Counters filled by :func:`run_windows` for logging and resume checks.

    ``model`` is the resolved model name actually recorded in the store (for
    the replay backend, the source run's model).
    """

    backend_calls: int = 0
    loaded: int = 0
    model: str = ""


def _result(
    window: Optional[Window],
    raw_text: str,
    failure: Optional[FailureKind],
    latency_ms: int,
    attempt_count: int,
) -> InferenceResult:
    return InferenceResult(
        window_id=window.window_id if window is not None else -1,
        raw_text=raw_text,
        reasoning_trace=first_trace(raw_text),
        predictions=(),
        failure=failure,
        latency_ms=latency_ms,
        attempt_count=attempt_count,
    )


class _HttpBackend:
    def __init__(self, cfg: BackendConfig) -> None:
        self._cfg = cfg
        url = cfg.endpoint.rstrip("/")
        if not url.endswith("/chat/completions"):
            url += CHAT_COMPLETIONS_PATH
        self._url = url
        headers = {}
        api_key = os.environ.get(cfg.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(timeout=cfg.timeout, headers=headers)

    def close(self) -> None:
        self._client.close()

    def infer(self, prompt: PromptText, window: Optional[Window] = None) -> InferenceResult:
        cfg = self._cfg
        messages = []
        if prompt.system_text:
            messages.append({"role": "system", "content": prompt.system_text})
        messages.append({"role": "user", "content": prompt.user_text})
        body = {
            "model": cfg.model,
            "messages": messages,
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }

        start = time.monotonic()
        delay = cfg.backoff_initial
        attempts = 0
        last_error = ""
        while attempts <= cfg.max_retries:
            attempts += 1
            transient, raw_text, error = self._one_attempt(body)
            latency = int((time.monotonic() - start) * 1000)
            if raw_text is not None:
                failure = FailureKind.EMPTY_OUTPUT if not raw_text.strip() else None
                return _result(window, raw_text, failure, latency, attempts)
            last_error = error
            if not transient:
                break
            if attempts <= cfg.max_retries:
                time.sleep(delay)
                delay *= cfg.backoff_multiplier
        latency = int((time.monotonic() - start) * 1000)
        log.warning("window %s: transport failed after %d attempts: %s",
                    window.window_id if window else "?", attempts, last_error)
        return _result(window, "", FailureKind.TRANSPORT_FAILED, latency, attempts)

    def _one_attempt(self, body: dict) -> tuple[bool, Optional[str], str]:
        """Returns (transient, raw_text or None, error description)."""
        try:
            response = self._client.post(self._url, json=body)
        except httpx.TimeoutException as exc:
            return True, None, f"timeout: {exc}"
        except httpx.TransportError as exc:
            return True, None, f"transport error: {exc}"
        status = response.status_code
        if status == 200:
            try:
                message = response.json()["choices"][0]["message"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                # Broken envelope from a flaky proxy looks transient.
                return True, None, f"unparseable 200 response: {exc}"
            content = message.get("content") or ""
            reasoning = message.get("reasoning_content") or ""
            if reasoning and THINK_OPEN not in content:
                # Some servers split the trace out; reassemble so the stored
                # completion keeps it.
                content = f"{THINK_OPEN}\n{reasoning}\n{THINK_CLOSE}\n{content}"
            return False, content, ""
        if status == 429 or status >= 500:
            return True, None, f"HTTP {status}"
        return False, None, f"HTTP {status}"


class _MockBackend:
    def __init__(self, cfg: BackendConfig) -> None:
        path = Path(cfg.script)
        if not path.is_file():
            raise BackendError(f"mock script not found: {path}")
        spec = importlib.util.spec_from_file_location(f"harkit_mock_{path.stem}", path)
        if spec is None or spec.loader is None:
            raise BackendError(f"cannot load mock script {path}")
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        respond = getattr(module, "respond", None)
        if not callable(respond):
            raise BackendError(f"mock script {path} must define respond(request) -> str")
        self._respond: Callable[[dict], str] = respond

    def close(self) -> None:
        pass

    def infer(self, prompt: PromptText, window: Optional[Window] = None) -> InferenceResult:
        request = {
            "system": prompt.system_text,
            "user": prompt.user_text,
            "window_id": window.window_id if window is not None else None,
            "event_ids": list(window.event_ids) if window is not None else None,
            "truth": list(window.truth) if window is not None else None,
        }
        try:
            raw_text = self._respond(request)
        except Exception as exc:
            raise BackendError(f"mock script raised: {exc!r}") from exc
        if not isinstance(raw_text, str):
            raise BackendError("mock script must return a string")
        failure = FailureKind.EMPTY_OUTPUT if not raw_text.strip() else None
        return _result(window, raw_text, failure, 0, 1)


class _ReplayBackend:
    def __init__(self, cfg: BackendConfig) -> None:
        root = Path(cfg.replay_dir) / "windows"
        if not root.is_dir():
            raise BackendError(f"replay run directory has no window store: {cfg.replay_dir}")
        self._by_hash: dict[str, Path] = {}
        self.source_model = ""
        for meta_path in sorted(root.glob("*/meta.json")):
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            self._by_hash[meta["prompt_hash"]] = meta_path.parent
            self.source_model = str(meta.get("model", ""))

    def close(self) -> None:
        pass

    def infer(self, prompt: PromptText, window: Optional[Window] = None) -> InferenceResult:
        stored = self._by_hash.get(prompt.prompt_hash)
        if stored is None:
            raise ReplayMissError(f"no stored response for prompt_hash {prompt.prompt_hash}")
        return _load_window_dir(stored)


def make_backend(cfg: BackendConfig):
    if cfg.kind == HTTP:
        return _HttpBackend(cfg)
    if cfg.kind == MOCK:
        return _MockBackend(cfg)
    return _ReplayBackend(cfg)


def infer(
    prompt: PromptText, cfg: BackendConfig, window: Optional[Window] = None
) -> InferenceResult:
    """Run one prompt against the configured backend."""
    backend = make_backend(cfg)
    try:
        return backend.infer(prompt, window)
    finally:
        backend.close()


def _load_window_dir(path: Path) -> InferenceResult:
    meta = json.loads((path / "meta.json").read_text(encoding="utf-8"))
    raw_text = (path / "response.txt").read_text(encoding="utf-8")
    failure = FailureKind(meta["failure"]) if meta.get("failure") else None
    return InferenceResult(
        window_id=int(meta["window_id"]),
        raw_text=raw_text,
        reasoning_trace=first_trace(raw_text),
        predictions=(),
        failure=failure,
        latency_ms=int(meta.get("latency_ms", 0)),
        attempt_count=int(meta.get("attempt_count", 1)),
    )


def load_stored_result(run_dir: str | Path, window_id: int) -> Optional[InferenceResult]:
    """The persisted result for a window, or None when absent or partial."""
    path = Path(run_dir) / "windows" / str(window_id)
    if not (path / "meta.json").is_file() or not (path / "response.txt").is_file():
        return None
    try:
        return _load_window_dir(path)
    except (ValueError, KeyError, OSError):
        return None


def load_stored_meta(run_dir: str | Path, window_id: int) -> Optional[dict]:
    path = Path(run_dir) / "windows" / str(window_id) / "meta.json"
    if not path.is_file():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def _persist_window(
    run_dir: Path, window: Window, prompt: PromptText, result: InferenceResult, model: str
) -> None:
    windows_dir = run_dir / "windows"
    windows_dir.mkdir(parents=True, exist_ok=True)
    final = windows_dir / str(window.window_id)
    tmp = windows_dir / f".tmp-{window.window_id}"
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir()
    (tmp / "prompt.txt").write_text(prompt.user_text, encoding="utf-8")
    meta = {
        "window_id": window.window_id,
        "session_id": window.session_id,
        "prompt_hash": prompt.prompt_hash,
        "model": model,
        "failure": result.failure.value if result.failure else None,
        "latency_ms": result.latency_ms,
        "attempt_count": result.attempt_count,
    }
    if prompt.system_text:
        meta["system_text"] = prompt.system_text
    (tmp / "meta.json").write_text(
        json.dumps(meta, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    (tmp / "response.txt").write_text(result.raw_text, encoding="utf-8")
    if final.exists():
        shutil.rmtree(final)
    os.rename(tmp, final)


def run_windows(
    windows: Sequence[Window],
    profile: HomeProfile,
    cfg: BackendConfig,
    run_dir: str | Path,
    stats: Optional[RunStats] = None,
) -> list[InferenceResult]:
    """Execute every window's prompt, persisting as it goes.

    Resumable: windows with a stored successful response are loaded instead
    of re-queried (a stored transport failure is retried, which is how a
    broken teacher run gets repaired). A stored response whose prompt hash
    does not match the current profile/window is an error: the run directory
    belongs to a different experiment.

    At most ``cfg.max_in_flight`` requests are in flight; per-window
    transport failures are recorded in the results, never raised. The
    returned list is ordered by window id.
    """
    run_dir = Path(run_dir)
    if stats is None:
        stats = RunStats()
    prompts = {w.window_id: build_prompt(w, profile, cfg.system_split) for w in windows}

    results: dict[int, InferenceResult] = {}
    pending: list[Window] = []
    for window in windows:
        stored = load_stored_result(run_dir, window.window_id)
        if stored is not None and stored.failure is not FailureKind.TRANSPORT_FAILED:
            meta = load_stored_meta(run_dir, window.window_id) or {}
            if meta.get("prompt_hash") != prompts[window.window_id].prompt_hash:
                raise BackendError(
                    f"run dir {run_dir} already holds window {window.window_id} for a "
                    "different prompt; refusing to mix experiments"
                )
            results[window.window_id] = stored
            stats.loaded += 1
        else:
            pending.append(window)

    backend = make_backend(cfg)
    stats.model = cfg.model or getattr(backend, "source_model", "")
    try:
        def _run_one(window: Window) -> InferenceResult:
            prompt = prompts[window.window_id]
            result = backend.infer(prompt, window)
            _persist_window(run_dir, window, prompt, result, stats.model)
            return result

        if pending:
            with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
                futures = {pool.submit(_run_one, w): w for w in pending}
                for future in as_completed(futures):
                    result = future.result()
                    results[result.window_id] = result
                    stats.backend_calls += 1
    finally:
        backend.close()

    log.info("run_windows: %d backend calls, %d loaded from store",
             stats.backend_calls, stats.loaded)
    return [results[w.window_id] for w in sorted(windows, key=lambda w: w.window_id)]
