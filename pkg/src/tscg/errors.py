"""Exception types shared across the package."""


class TSCGError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TSCGError, ValueError):
    """Malformed or non-finite input data."""


class ConfigurationError(TSCGError, ValueError):
    """Tuning parameters that cannot produce a valid estimation setup."""


class NumericalError(TSCGError, ArithmeticError):
    """A linear-algebra step failed (singular system, SVD failure, ...)."""


class DomainError(NumericalError):
    """A function was evaluated outside its domain (e.g. log det of a non-PD matrix)."""


class DivergenceError(NumericalError):
    """An iterative solver produced non-finite iterates."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class StageError(TSCGError):
    """Wraps an error raised inside a pipeline stage, keeping the stage label."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
