"""Exception types raised across the package."""


class ReachError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ReachError, ValueError):
    pass


class InsufficientSamples(ReachError, ValueError):
    """Fewer points than monomials: the moment matrix cannot be definite."""


class SingularMoment(ReachError, ArithmeticError):
    """The moment matrix stayed indefinite even at the largest jitter."""


class NonFiniteState(ReachError, ArithmeticError):
    """A trajectory blew up (or the step was too large)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class MonotonicityViolated(ReachError, ArithmeticError):
    pass


class ConfigError(ReachError, ValueError):
    pass
