"""Exception types shared across the package."""


class SingError(Exception):
    """Base class for numerical and algorithmic failures."""


class ExponentOverflowError(SingError):
    """The monotone integrand's exponent exceeded the clamp threshold (700).

    Raised instead of silently saturating so that fit divergence is
    observable by callers.
    """


class InsufficientSamplesError(SingError):
    """Fewer samples than coefficients for a component fit."""


class NonConvergenceError(SingError):
    """Newton iteration cap reached, or a curvature check failed at the optimum."""


class SingularHessianError(SingError):
    """Hessian solve failed even after Levenberg damping escalation."""


class RootBracketError(SingError):
    """Map inversion could not bracket a root within |x| <= 1e6."""


class NotPositiveDefiniteError(SingError):
    """A matrix required to be symmetric positive definite is not."""


class DataError(Exception):
    """Malformed input data (bad CSV, non-finite cells, schema mismatch).

    Deliberately not a SingError: the CLI maps DataError to the I/O exit
    code and SingError to the numerical-failure exit code.
    """
