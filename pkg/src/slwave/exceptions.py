"""Exception types shared across the package."""


class SlwaveError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SlwaveError):
    """Invalid run configuration (bad JSON, missing fields, guard violations)."""


class GridMismatchError(SlwaveError):
    """Two grid functions do not live on the same grid."""


class BasisMismatchError(SlwaveError):
    """Coefficient vectors belong to different spectral bases."""


class EigensolveError(SlwaveError):
    """The tridiagonal eigensolver failed to converge."""


class NegativeSpectrumError(SlwaveError):
    """A non-integer operator power was requested on a spectrum with lambda_1 <= 0."""


class NonZeroCouplingError(SlwaveError):
    """An operation that requires a == b == 0 was called with nonzero coupling."""


class NonFiniteError(SlwaveError):
    """A state vector left the finite floating-point range."""


class NonNegativityViolatedError(SlwaveError):
    """A regularized coefficient that must be nonnegative dipped materially below zero."""


class RefusedResolutionError(SlwaveError):
    """A mollification width eps is too small for the grid (eps < 8h)."""


class SpecNotSmoothError(SlwaveError):
    """A singular coefficient spec was passed where a smooth one is required."""
