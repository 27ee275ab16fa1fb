"""Multi-resident activity recognition with chat LLMs.

Pipeline: sensor-event textualization, fixed-size windowing, prompt
assembly, inference against OpenAI-compatible endpoints (or mocks/replays),
tolerant answer extraction, and per-session F1 evaluation. Plus tooling to
harvest teacher reasoning traces into fine-tuning corpora for small student
models.
"""

from .model import (
    ActivityLabel,
    EventKind,
    FailureKind,
    HomeProfile,
    InferenceResult,
    Prediction,
    SensorEvent,
    TextualizedEvent,
    Window,
    canonical_label,
    load_profile,
    validate_profile,
)
from .ingest import Dataset, GeneratorSpec, SplitPolicy, generate_synthetic, load_dataset, split
from .windows import segment, textualize, window_to_json
from .prompts import PromptText, build_prompt, expected_output_schema
from .gateway import BackendConfig, RunStats, infer, run_windows
from .scoring import (
    DatasetReport,
    SessionMetrics,
    aggregate,
    complete_result,
    extract_predictions,
    match_label,
    score_session,
)
from .distill import CorpusManifest, build_corpus, subset_by_sessions
from .pipeline import execute_run

__version__ = "0.1.0"

__all__ = [
    "ActivityLabel",
    "BackendConfig",
    "CorpusManifest",
    "Dataset",
    "DatasetReport",
    "EventKind",
    "FailureKind",
    "GeneratorSpec",
    "HomeProfile",
    "InferenceResult",
    "Prediction",
    "PromptText",
    "RunStats",
    "SensorEvent",
    "SessionMetrics",
    "SplitPolicy",
    "TextualizedEvent",
    "Window",
    "aggregate",
    "build_corpus",
    "build_prompt",
    "canonical_label",
    "complete_result",
    "execute_run",
    "expected_output_schema",
    "extract_predictions",
    "generate_synthetic",
    "infer",
    "load_dataset",
    "load_profile",
    "match_label",
    "run_windows",
    "score_session",
    "segment",
    "split",
    "subset_by_sessions",
    "textualize",
    "validate_profile",
    "window_to_json",
]
