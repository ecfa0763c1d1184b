"""Exception hierarchy for opkit."""


class OpkitError(Exception):
    """Base class for all library errors."""


class DimensionError(OpkitError, ValueError):
    """Raised when operator or vector shapes are incompatible."""


class ValidationError(OpkitError, ValueError):
    """Raised when an input vector or operator payload is malformed."""


class MaterializationError(OpkitError):
    """Raised when a dense matrix would exceed the configured entry cap."""


class SingularSystemError(OpkitError, ArithmeticError):
    """Raised when a direct least-squares solve meets a singular Gram matrix."""


class ConvergenceError(OpkitError, RuntimeError):
    """Raised when an iterative estimate fails to converge.

    Parameters
    ----------
    message : str
        Human-readable description.
    last_estimate : float, optional
        The last value produced before giving up.
    """

    def __init__(self, message, last_estimate=None):
        super().__init__(message)
        self.last_estimate = last_estimate


class IllConditionedError(OpkitError, ArithmeticError):
    """Raised when an operator is rank deficient (infinite condition number)."""

    def __init__(self, message, smax=None, smin=None):
        super().__init__(message)
        self.smax = smax
        self.smin = smin
