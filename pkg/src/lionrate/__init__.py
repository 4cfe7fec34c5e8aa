"""LION optimizer with theory-prescribed schedules and convergence certificates."""

from lionrate.errors import (
    BudgetError,
    ConfigError,
    DimensionError,
    DomainError,
    InvalidInputError,
    LionRateError,
    UnsupportedProblemError,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "InvalidInputError",
    "LionRateError",
    "UnsupportedProblemError",
    "__version__",
]
