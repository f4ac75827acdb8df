"""Exception types raised by the library."""


class MalformedCM(ValueError):
    """Covariance matrix is unphysical, non-symmetric or outside a formula's domain."""


class InvalidParams(ValueError):
    """Laser parameters violate their allowed ranges."""


class DriftUnstable(RuntimeError):
    """Steady-state linear system is singular or the drift is not stable."""


class NonConvergence(RuntimeError):
    """Time integration did not settle before the time limit."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
