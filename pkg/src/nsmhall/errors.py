"""Exception types raised across the package."""


class NsmHallError(Exception):
    """Base class for all package errors."""


class NegativePowerOnMeanMode(NsmHallError, ValueError):
    """A negative-order operator was applied to a field with a nonzero mean."""


class BoxMismatch(NsmHallError, ValueError):
    """Two fields living on different boxes were combined."""


class NoConvergence(NsmHallError, RuntimeError):
    """An iterative solve did not reach its tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class CflViolation(NsmHallError, RuntimeError):
    """The requested time step exceeds the explicit stability bound."""


class UnknownFamily(NsmHallError, KeyError):
    """Unknown initial-condition family name."""


class NonzeroMeanMode(NsmHallError, ValueError):
    """A field that must be mean-free has a nonzero mean mode."""


class NonSolenoidal(NsmHallError, ValueError):
    """A field that must be divergence-free is not."""


class FitDegenerate(NsmHallError, ValueError):
    """Rate fitting was asked to fit errors at or below roundoff."""


class NonPositiveInput(NsmHallError, ValueError):
    """Log-log fitting received a non-positive value."""


class DegenerateRHS(NsmHallError, ArithmeticError):
    """The right-hand side of an inequality check underflowed."""
