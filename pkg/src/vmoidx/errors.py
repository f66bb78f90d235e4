"""Exception hierarchy.

Every error raised by the library derives from :class:`VmoIndexError`.  The
``exit_code`` attribute is what the command line front end returns when the
error escapes a command.
"""


class VmoIndexError(Exception):
    exit_code = 3


class ConfigError(VmoIndexError, ValueError):
    exit_code = 4


class TopologicalObstruction(VmoIndexError):
    """The boundary datum cannot be extended without zeros."""

    exit_code = 2

    def __init__(self, ind_minus, chi, message=None):
        self.ind_minus = int(ind_minus)
        self.chi = int(chi)
        super().__init__(
            message
            or f"inward boundary index {self.ind_minus} differs from Euler characteristic {self.chi}"
        )


class CertificationError(VmoIndexError):
    """A numerical certificate could not be established."""


# geometry
class BoundaryPresent(VmoIndexError, ValueError):
    pass


class EpsTooLarge(VmoIndexError, ValueError):
    pass


class CollarTooNarrow(VmoIndexError, ValueError):
    pass


# fields
class OutOfChart(VmoIndexError, ValueError):
    pass


class ZeroOnBoundary(CertificationError):
    pass


class ClusterUnresolved(CertificationError):
    pass


class BudgetExceeded(CertificationError):
    pass


# degree
class NotRegularValue(CertificationError):
    pass


class NonIntegerResult(CertificationError):
    pass


class VanishingOnCircle(CertificationError):
    pass


class UnderResolved(CertificationError):
    pass


# index
class DegenerateZero(CertificationError):
    pass


class BallContainsOtherZero(CertificationError):
    pass


class VanishingOnBoundary(CertificationError):
    pass


class DegenerateBoundaryZero(CertificationError):
    pass


class ZeroOutsideSubregions(CertificationError):
    pass


# vmo / extension / qtensor
class NotConstantOverGrid(CertificationError):
    pass


class NormCollapse(CertificationError):
    pass


class NonzeroIndex(VmoIndexError, ValueError):
    pass


class ZeroNorm(VmoIndexError, ValueError):
    pass


class NonIntegrableDatum(CertificationError):
    pass


class NotTangent(VmoIndexError, ValueError):
    pass


class NotAdmissible(VmoIndexError, ValueError):
    pass


class DegenerateQ(VmoIndexError, ValueError):
    pass
