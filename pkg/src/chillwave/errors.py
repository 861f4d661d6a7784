"""Exception types shared across the package."""


class ChillwaveError(Exception):
    """Base class for all package-specific errors."""


class MeanNotZero(ChillwaveError):
    """A field that must have zero mean (or two fields that must share a
    mean) violated the tolerance. Signals a non-conservative input to an
    H^-1 computation."""


class SingularSystem(ChillwaveError):
    """The step operator's block system could not be factorized."""


class SolveFailed(ChillwaveError):
    """A linear solve finished but its residual exceeded the contract."""


class NonFinite(ChillwaveError):
    """A time step produced non-finite values or exceeded the blow-up
    magnitude bound. Stability sweeps treat this as an unstable verdict."""


class QuadratureError(ChillwaveError):
    """Newton iteration for a Gauss-Legendre node failed to converge."""
