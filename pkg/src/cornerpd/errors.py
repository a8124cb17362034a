"""Exception hierarchy shared by every module."""


class CornerPDError(Exception):
    """Base class for all package errors."""


class ValidationError(CornerPDError, ValueError):
    """Input violates a documented precondition."""


class DimensionError(ValidationError):
    """Shapes of the arguments do not agree."""


class CapacityError(CornerPDError):
    """Exact enumeration requested above the configured cap."""


class NonConvergenceError(CornerPDError, RuntimeError):
    """Iterative search exhausted its sweep budget.

    The last visited point is kept on ``state`` so callers can resume.
    """

    def __init__(self, message, state=None, sweeps=None):
        super().__init__(message)
        self.state = state
        self.sweeps = sweeps


class CertificateError(CornerPDError, RuntimeError):
    """A certificate produced internally failed its own verification."""
