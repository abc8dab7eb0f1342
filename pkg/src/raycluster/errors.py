"""Exception types raised across the package."""


class RayClusterError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(RayClusterError, ValueError):
    pass


class InvalidPolygon(GeometryError):
    pass


class OriginOutside(GeometryError):
    pass


class DegenerateShrink(GeometryError):
    pass


class DimensionMismatch(GeometryError):
    pass


class EmptyMask(GeometryError):
    pass


class TooNarrow(GeometryError):
    """Fewer foreground columns than requested centers."""

    def __init__(self, message, columns):
        super().__init__(message)
        self.columns = columns


class OutOfBounds(GeometryError):
    pass


class CoincidentCenters(GeometryError):
    pass


class Degenerate(GeometryError):
    pass


class EmptyUnion(GeometryError):
    pass


class NonPositiveDistance(RayClusterError, ValueError):
    pass


class CannotPlace(RayClusterError):
    pass


class ContainerError(RayClusterError, ValueError):
    pass


class BadMagic(ContainerError):
    pass


class BadVersion(ContainerError):
    pass


class Truncated(ContainerError):
    pass


class Oversize(ContainerError):
    pass
