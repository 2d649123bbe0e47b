"""Exception types raised by the relmor solvers and reduction algorithms."""


class RelmorError(Exception):
    """Base class for all relmor-specific failures."""


class DimensionError(RelmorError, ValueError):
    """Matrix or system dimensions are inconsistent with the operation."""


class SpectrumSeparationError(RelmorError):
    """Sylvester operator is singular or nearly singular.

    Carries the smallest eigenvalue-sum separation found, so callers can
    report how close the problem is to non-uniqueness.
    """

    def __init__(self, message, separation=None):
        super().__init__(message)
        self.separation = separation


class StabilityError(RelmorError):
    """A matrix required to be Hurwitz (or anti-Hurwitz) is not."""


class MinimumPhaseError(RelmorError):
    """A system required to be minimum phase has right-half-plane zeros."""


class SingularMatrixError(RelmorError):
    """A matrix required to be invertible is singular to working precision."""


class RiccatiError(RelmorError):
    """No stabilizing (or anti-stabilizing) Riccati solution exists."""


class ResidualError(RelmorError):
    """A solver produced a solution violating its certified residual bound."""

    def __init__(self, message, residual=None, bound=None):
        super().__init__(message)
        self.residual = residual
        self.bound = bound


class ConvergenceError(RelmorError):
    """An iterative procedure failed and no usable iterate is available.

    The ``trace`` attribute, when present, holds the iteration history
    accumulated before the failure.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ModelFormatError(RelmorError, ValueError):
    """A model file could not be parsed; message carries the line number."""
