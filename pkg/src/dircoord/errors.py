"""Exception hierarchy shared across the library and the benchmark harness."""


class DircoordError(Exception):
    """Base class for all library-specific errors."""


class NotInImageError(DircoordError):
    """Matrix is not (close enough to) the image of the 2-parameter wedge map."""


class NearPiSingularityError(DircoordError):
    """Rotation angle too close to pi for a well-defined logarithm."""


class NegativeRangeError(DircoordError):
    """A range perturbation would produce a negative range."""


class NotPsdError(DircoordError):
    """Covariance is not positive semi-definite, even after jitter."""


class MeanAtOriginError(DircoordError):
    """Cartesian mean too close to the origin to define a direction."""


class GimbalPoleError(DircoordError):
    """Direction at elevation +/-pi/2, where azimuth is undefined."""


class OriginSingularityError(DircoordError):
    """Cartesian linearization point too close to the origin."""


class ZeroRangeError(DircoordError):
    """Kinematics evaluated at (or driven below) zero range."""


class SingularInnovationError(DircoordError):
    """Innovation covariance is singular or too ill-conditioned to invert."""


class SingularCovarianceError(DircoordError):
    """State covariance is singular; NEES/Mahalanobis undefined."""


class DuplicatePointsError(DircoordError):
    """Sample clouds contain coincident points; k-NN distances are zero."""


class MisalignedTimestampsError(DircoordError):
    """Trial records do not share a common time grid."""


class RejectionLimitError(DircoordError):
    """Trajectory rejection sampling exhausted its retry budget."""


class ParseError(DircoordError):
    """A replay log row could not be parsed.

    Attributes:
        line: 1-based line number of the offending row (0 if unknown).
    """

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class NonMonotoneTimeError(DircoordError):
    """Replay log timestamps are not strictly increasing."""


class ConfigError(DircoordError):
    """Scenario configuration is invalid or could not be parsed."""
