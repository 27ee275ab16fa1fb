"""Exception types for the fine-tuning driver."""


class TracetuneError(Exception):
    """Base class for driver errors."""


class ConfigError(TracetuneError):
    """A training config file is missing, malformed, or inconsistent."""


class CorpusError(TracetuneError):
    """The training corpus is missing, empty, or not chat-format records."""


class ModelError(TracetuneError):
    """The base model cannot be loaded or has no adapter target modules."""


class ExportError(TracetuneError):
    """An adapter cannot be exported against the given base model."""
