"""Exception types shared across the package."""


class RdodeError(Exception):
    """Base class for all package errors."""


class SingularPointError(RdodeError):
    """Evaluation at a point where the kinetics are undefined (e.g. u = -beta)."""


class FoldError(RdodeError):
    """Two branches merge inside the requested window (f_u = 0)."""

    def __init__(self, message, v_fold=None):
        super().__init__(message)
        self.v_fold = v_fold


class WindowViolationError(RdodeError):
    """A solver iterate left the trusted V-window of the branch set."""


class NonConvergenceError(RdodeError):
    """Newton iteration failed to reach the requested tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ResonanceError(RdodeError):
    """gamma sits (numerically) on the excluded discrete set det/(a0*mu_k)."""

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class AssumptionError(RdodeError):
    """A hypothesis required by the construction does not hold."""


class BlowUpError(RdodeError):
    """Time stepping produced a non-finite value."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class MaskError(RdodeError):
    """Mask file does not match the grid or is malformed."""


class ConfigError(RdodeError):
    """Invalid or incomplete experiment configuration."""
