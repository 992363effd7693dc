"""Semantic exception hierarchy for the cone-overlap toolkit."""


class ConeOverlapError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameter(ConeOverlapError, ValueError):
    """An argument violates a documented precondition."""


class BoxContainsOrigin(ConeOverlapError):
    """Argument enclosure undefined: the box touches the origin or the
    branch cut of arg; the caller must subdivide."""


class ZeroVector(ConeOverlapError):
    """arg requested for the zero vector."""


class WrongVariant(ConeOverlapError):
    """Operation called on a slab variant it does not support."""


class ParamOutOfRange(ConeOverlapError, ValueError):
    """Slab parametrization coordinates outside the slab's box."""


class IndexOutOfRange(ConeOverlapError, ValueError):
    """Sector index outside the index set in force."""


class InvalidSample(ConeOverlapError, ValueError):
    """Sample or point count below the documented minimum."""


class InvalidEpsilon(ConeOverlapError, ValueError):
    """Neighborhood exponent outside (0, 1/2)."""


class HypothesisViolated(ConeOverlapError):
    """A check's stated hypothesis fails for the supplied cell."""


class DomainError(ConeOverlapError, ValueError):
    """Function argument outside its mathematical domain."""
