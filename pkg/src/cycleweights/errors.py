"""Exception hierarchy shared by every module."""


class CycleWeightsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CycleWeightsError, ValueError):
    """Invalid parameters, ranges or run configuration."""


class NumericError(CycleWeightsError, ArithmeticError):
    """A computation failed numerically (overflow, vanishing normalization)."""


class BudgetExceeded(NumericError):
    """A size or degree budget is too small for the requested quantity."""


class TruncationError(NumericError):
    """A truncated series did not converge at the requested point."""


class UnsupportedLimit(CycleWeightsError):
    """No limit law is known for this (family, statistic) pair."""
