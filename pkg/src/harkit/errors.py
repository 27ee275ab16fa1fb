"""Exception types shared across the toolkit."""

from __future__ import annotations


class HarkitError(Exception):
    """Base class for all toolkit errors."""


class ProfileError(HarkitError):
    """A home profile file is missing, malformed, or internally inconsistent."""


class DatasetError(HarkitError):
    """An event log could not be loaded."""


class UnknownLabelError(DatasetError):
    """An event carries a truth label outside the profile vocabulary."""


class UnknownRoomError(DatasetError):
    """An event references a room the profile does not declare."""


class UnknownEventKindError(HarkitError):
    """An event kind has no entry in the transition table."""


class SplitError(HarkitError):
    """A split policy cannot be applied to the dataset."""


class GeneratorError(HarkitError):
    """A synthetic-dataset spec is invalid."""


class BackendError(HarkitError):
    """A backend is misconfigured or a fatal (non per-window) failure occurred."""


class ReplayMissError(BackendError):
    """The replay store holds no response for the requested prompt hash."""


class CorpusError(HarkitError):
    """A distillation corpus cannot be built or subset."""


class ConfigError(HarkitError):
    """An experiment config file is invalid."""
