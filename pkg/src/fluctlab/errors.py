"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid run configuration: unknown preset, missing or bad parameter."""


class DomainError(ValueError):
    """A functional was requested outside its domain of definition."""


class NumericError(ArithmeticError):
    """Quadrature or another numeric procedure failed to converge."""


class StabilityError(RuntimeError):
    """The explicit step-size restriction cannot be satisfied."""
