"""Exception types. Domain-style errors map to CLI exit code 1."""


class EntroplinError(Exception):
    """Base class for all library errors."""


class DomainError(EntroplinError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(DomainError):
    """A run configuration cannot be honoured (e.g. truncation too short)."""


class DegenerateSampleError(DomainError):
    """A statistic is undefined because the sample has zero variance."""


class InsufficientSignalError(DomainError):
    """Too few usable points for a fit."""


class ConvergenceError(EntroplinError, ArithmeticError):
    """A series or quadrature did not reach the requested tolerance."""
