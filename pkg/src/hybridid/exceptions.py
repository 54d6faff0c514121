"""Exception hierarchy shared across the package."""


class HybridIdError(Exception):
    """Base class for all package errors."""


class ShapeError(HybridIdError, ValueError):
    """Array dimensions do not match what an operation expects."""


class DomainError(HybridIdError, ValueError):
    """An argument lies outside the domain of an operation."""


class NumericError(HybridIdError, FloatingPointError):
    """A non-finite value appeared during a computation."""


class DegenerateMixingError(DomainError):
    """Ventilation mixing has zero total weight (C_r + alpha * O == 0)."""


class IdentificationError(HybridIdError):
    """Linear system identification failed (e.g. rank deficiency)."""


class DivergenceError(NumericError):
    """A free-run simulation blew up."""


class FitError(HybridIdError):
    """A model could not be fitted to the supplied data."""


class ConfigError(HybridIdError):
    """Configuration is missing a key or holds an invalid value."""


class PartialResultError(HybridIdError):
    """Some members of a batch job failed; ``completed`` holds the rest."""

    def __init__(self, message, completed=None):
        super().__init__(message)
        self.completed = completed or []


class WorkerError(HybridIdError):
    """A rollout worker failed during distributed training."""
