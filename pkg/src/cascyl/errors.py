"""Exception types shared across the package."""


class CascylError(Exception):
    """Base class for solver errors."""


class GeometryError(CascylError):
    """Sphere and cylinder overlap (a + b >= 1) or invalid lengths."""


class ConvergenceError(CascylError):
    """A quadrature, mode sum or truncation ladder failed to converge.

    The offending partial results, when available, are attached as the
    ``details`` dict.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class SpectralRadiusError(CascylError):
    """det(1 - M) <= 0, signalling overlap or a broken truncation."""


class SingularTMatrixError(CascylError):
    """A T-matrix denominator fell below the representable range."""
