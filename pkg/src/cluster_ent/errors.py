"""Exception types raised by the package.

All domain errors derive from :class:`ClusterEntError` so the CLI can map
them to exit status 1 in one place.
"""


class ClusterEntError(ValueError):
    """Base class for domain errors."""


class NonHermitian(ClusterEntError):
    pass


class TraceNotOne(ClusterEntError):
    pass


class NegativeFidelity(ClusterEntError):
    pass


class NegativeEntry(ClusterEntError):
    pass


class NotNormalized(ClusterEntError):
    pass


class RegionUnreachable(ClusterEntError):
    pass


class MutualExclusionBreach(ClusterEntError):
    pass


class InvalidQuad(ClusterEntError):
    pass


class DomainError(ClusterEntError):
    pass


class RegionMismatch(ClusterEntError):
    pass


class NotConverged(ClusterEntError):
    pass
