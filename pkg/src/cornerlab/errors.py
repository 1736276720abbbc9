"""Exception hierarchy for cornerlab.

Every error raised on purpose by the library derives from
:class:`CornerLabError`, so the CLI can map them to exit codes in one place.
"""


class CornerLabError(Exception):
    """Base class for all library errors."""


class ConfigError(CornerLabError):
    pass


# geometry
class AngleSumViolation(CornerLabError, ValueError):
    pass


class GeometryMismatch(CornerLabError, ValueError):
    pass


class EpsilonOutOfRange(CornerLabError, ValueError):
    pass


# meshing
class MeshFailure(CornerLabError, RuntimeError):
    pass


class EmptyRegion(CornerLabError, ValueError):
    pass


# fem
class SolveFailure(CornerLabError, RuntimeError):
    pass


class SupportViolation(CornerLabError, ValueError):
    pass


class PointOutside(CornerLabError, ValueError):
    pass


# spectral
class NonPositiveMu(CornerLabError, ValueError):
    pass


class PointOutsideSector(CornerLabError, ValueError):
    pass


# singular
class RhoOutOfRange(CornerLabError, ValueError):
    pass


class NotInSector(CornerLabError, ValueError):
    pass


class TruncationTooSmall(CornerLabError, ValueError):
    pass


class RadiusOutOfRange(CornerLabError, ValueError):
    pass


class OverlappingCutoffs(CornerLabError, ValueError):
    pass


class CornerMismatch(CornerLabError, ValueError):
    pass


# norms
class OrderUnavailable(CornerLabError, ValueError):
    pass


class DivergentRequest(CornerLabError, ValueError):
    pass


class NonzeroTrace(CornerLabError, ValueError):
    pass


# experiments
class NonPositiveValue(CornerLabError, ValueError):
    pass


class SOutOfWindow(CornerLabError, ValueError):
    pass


class EmptyNullspace(CornerLabError, ValueError):
    pass
