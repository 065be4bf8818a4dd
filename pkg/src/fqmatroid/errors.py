"""Shared exception types."""


class FqError(Exception):
    """Base class for all package errors."""


class NotPrimePower(FqError):
    """Field order is not a prime power."""


class TooLarge(FqError):
    """Requested object exceeds the supported size range."""


class BudgetExceeded(FqError):
    """An enumeration or search would exceed its configured budget."""


class ConsistencyError(FqError):
    """Two independent computations of the same quantity disagree."""


class LoopPresent(FqError):
    """Operation undefined in the presence of a zero column."""


class InvalidParam(FqError):
    """Parameter outside the documented domain."""


class ConfigError(FqError):
    """Experiment configuration is invalid."""


class IoError(FqError):
    """Reading or writing an artifact failed."""
