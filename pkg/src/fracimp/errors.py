"""Exception types shared across the package."""


class FracimpError(Exception):
    """Base class for all package errors."""


class DomainError(FracimpError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(FracimpError, ValueError):
    """A result would overflow or leave the supported range."""


class StructuralError(FracimpError, ValueError):
    """Mismatched grids, partitions or array shapes."""


class InsufficientResolutionError(FracimpError, ValueError):
    """Too few sample nodes for a finite-difference operation."""


class EvaluationError(FracimpError, ValueError):
    """A user-supplied function or expression failed to evaluate."""


class ThetaTooSmallError(FracimpError, ValueError):
    """A stability denominator is non-positive at the requested weight.

    Carries the offending interval so callers can report it.
    """

    def __init__(self, message, interval_kind=None, interval_index=None, denominator=None):
        super().__init__(message)
        self.interval_kind = interval_kind
        self.interval_index = interval_index
        self.denominator = denominator


class NoThresholdError(FracimpError, RuntimeError):
    """No contraction threshold found inside the bisection bracket."""


class ConfigError(FracimpError, ValueError):
    """Invalid problem configuration file."""


class ExpressionError(FracimpError, ValueError):
    """Syntax or type error in the expression language.

    ``line`` and ``column`` are 1-based positions in the source text.
    """

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
