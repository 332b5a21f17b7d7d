"""Exception types shared across the toolkit."""


class LinekitError(Exception):
    """Base class for all toolkit errors."""


class DegenerateSegmentError(LinekitError, ValueError):
    """A zero-length segment was passed where a supporting line is needed."""


class PointAtInfinityError(LinekitError, ValueError):
    """A warped point has (near-)zero homogeneous w."""


class OutOfBoundsError(LinekitError, ValueError):
    """A sampling location lies outside the map extent."""


class SizeMismatchError(LinekitError, ValueError):
    """Two maps that must share a spatial size do not."""


class MapFormatError(LinekitError, ValueError):
    """A map file is malformed: bad magic, truncated payload, or non-finite data."""


class DegenerateConfigurationError(LinekitError, ValueError):
    """The line correspondences do not constrain a unique homography."""


class EstimationError(LinekitError, RuntimeError):
    """Robust estimation failed: too few matches or no acceptable model."""


class NoMatchesError(LinekitError, RuntimeError):
    """A metric that averages over matched lines found no matches."""
