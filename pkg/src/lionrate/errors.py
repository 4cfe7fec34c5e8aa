"""Exception hierarchy shared by every module."""


class LionRateError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(LionRateError, ValueError):
    """Non-finite or otherwise malformed numeric input."""


class DimensionError(LionRateError, ValueError):
    """Two vectors (or a vector and a problem) disagree on dimension."""


class DomainError(LionRateError, ValueError):
    """A point lies outside the region where a problem's constants are certified."""


class BudgetError(LionRateError, ValueError):
    """The iteration budget K is below a floor required by the schedule."""


class UnsupportedProblemError(LionRateError):
    """The requested operation is not available for this problem."""


class ConfigError(LionRateError, ValueError):
    """Invalid experiment configuration."""
