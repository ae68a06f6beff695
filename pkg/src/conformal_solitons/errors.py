"""Exception types raised by the verification engine."""


class GeometryError(ValueError):
    """Base class for rejected inputs and failed geometric constructions."""


class DimensionError(GeometryError):
    """Array shapes do not match the signature or chart dimension."""


class DomainError(GeometryError):
    """A parameter point lies outside (or too close to the edge of) a domain box."""


class JetEvaluationError(GeometryError):
    """A smooth map produced a non-finite value or derivative."""


class OffQuadricError(GeometryError):
    """A container point is not on the quadric within tolerance."""


class DegenerateMetricError(GeometryError):
    """The induced metric is (numerically) singular."""

    def __init__(self, det, message=None):
        self.det = float(abs(det))
        super().__init__(message or f"degenerate induced metric, |det g| = {self.det:.3e}")


class NullNormalError(GeometryError):
    """The normal direction is null, so it cannot be normalized."""


class MuUndefinedError(GeometryError):
    """Ric = mu A cannot be fitted because the Weingarten operator vanishes."""


class ValidationError(GeometryError):
    """A scenario configuration failed validation; ``path`` names the field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
