"""Planar interval-arithmetic primitives behind the certified predicates.

Every interval operation returns an enclosure of the exact real image of
its inputs.  Outward rounding is implemented as a fixed widening of 4 ulps
per elementary operation instead of switching FPU rounding modes; this is
portable and ample at the >= 1e-12 tolerance scales used throughout.

Certified predicates are three-valued (:class:`Verdict`): ``In`` and
``Out`` are sound claims, ``Unknown`` covers the boundary slack band (and,
for search-based predicates, budget exhaustion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BoxContainsOrigin, InvalidParameter, ZeroVector

DEFAULT_SLACK = 1e-12

_ULPS = 4.0
_PI = math.pi
_HALF_PI = math.pi / 2.0


def widen_down(x: float) -> float:
    return x - _ULPS * math.ulp(x)


def widen_up(x: float) -> float:
    return x + _ULPS * math.ulp(x)


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class Verdict:
    """Three-valued certified membership result.

    ``budget_exhausted`` distinguishes search-budget indeterminacy from
    slack-band indeterminacy; it is meaningful only when ``kind`` is
    ``"unknown"``.
    """

    kind: str  # "in" | "out" | "unknown"
    budget_exhausted: bool = False

    @property
    def is_in(self) -> bool:
        return self.kind == "in"

    @property
    def is_out(self) -> bool:
        return self.kind == "out"

    @property
    def is_unknown(self) -> bool:
        return self.kind == "unknown"

    def __str__(self) -> str:
        if self.kind == "unknown" and self.budget_exhausted:
            return "unknown(budget)"
        return self.kind


IN = Verdict("in")
OUT = Verdict("out")
UNKNOWN = Verdict("unknown")
UNKNOWN_BUDGET = Verdict("unknown", budget_exhausted=True)


def combine_all(*verdicts: Verdict) -> Verdict:
    """Conjunction: Out dominates, then Unknown, then In."""
    budget = False
    unknown = False
    for v in verdicts:
        if v.is_out:
            return OUT
        if v.is_unknown:
            unknown = True
            budget = budget or v.budget_exhausted
    if unknown:
        return UNKNOWN_BUDGET if budget else UNKNOWN
    return IN


def band_verdict(value: float, lo: float, hi: float, slack: float) -> Verdict:
    """Certified position of a scalar against the band [lo, hi], with the
    whole slack neighbourhood of either edge reported Unknown."""
    if value - lo > slack and hi - value > slack:
        return IN
    if value < lo - slack or value > hi + slack:
        return OUT
    return UNKNOWN


def band_verdict_half_open(value: float, lo: float, hi: float, slack: float) -> Verdict:
    """Like :func:`band_verdict` for the half-open band [lo, hi), except
    that exact equality with an edge is honoured exactly: value == lo is
    In (closed edge) and value == hi is Out (open edge).  Inputs are taken
    at face value; the slack band still covers near-boundary values."""
    if value == lo:
        return IN
    if value == hi:
        return OUT
    return band_verdict(value, lo, hi, slack)


# ---------------------------------------------------------------------------
# Intervals


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with outward-rounded arithmetic."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo <= self.hi):
            raise InvalidParameter(f"interval bounds out of order: [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(widen_down(self.lo + other.lo), widen_up(self.hi + other.hi))

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(widen_down(self.lo - other.hi), widen_up(self.hi - other.lo))

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        cands = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(widen_down(min(cands)), widen_up(max(cands)))

    def sqrt(self) -> "Interval":
        if self.hi < 0.0:
            raise InvalidParameter("sqrt of a negative interval")
        lo = math.sqrt(self.lo) if self.lo > 0.0 else 0.0
        return Interval(widen_down(lo), widen_up(math.sqrt(self.hi)))

    def abs_range(self) -> "Interval":
        if self.lo <= 0.0 <= self.hi:
            lo = 0.0
        else:
            lo = min(abs(self.lo), abs(self.hi))
        return Interval(lo, max(abs(self.lo), abs(self.hi)))


def iv_cos(t: Interval) -> Interval:
    """Enclosure of cos over t; valid for any finite t."""
    lo, hi = _cos_bounds(t.lo, t.hi)
    return Interval(lo, hi)


def iv_sin(t: Interval) -> Interval:
    lo, hi = _sin_bounds(t.lo, t.hi)
    return Interval(lo, hi)


def _cos_bounds(a: float, b: float) -> tuple[float, float]:
    vals = [math.cos(a), math.cos(b)]
    k0 = math.ceil(a / _PI)
    k1 = math.floor(b / _PI)
    for k in range(k0, k1 + 1):
        vals.append(1.0 if k % 2 == 0 else -1.0)
    return widen_down(min(vals)), widen_up(max(vals))


def _sin_bounds(a: float, b: float) -> tuple[float, float]:
    vals = [math.sin(a), math.sin(b)]
    k0 = math.ceil((a - _HALF_PI) / _PI)
    k1 = math.floor((b - _HALF_PI) / _PI)
    for k in range(k0, k1 + 1):
        vals.append(1.0 if k % 2 == 0 else -1.0)
    return widen_down(min(vals)), widen_up(max(vals))


def iv_eval_norm(x: Interval, y: Interval) -> Interval:
    """Enclosure of sqrt(x^2 + y^2) over the box x × y.

    Exact up to rounding: the min/max of each squared coordinate over a box
    are separable, so the extrema are attained at corners or perpendicular
    feet.
    """
    ax = x.abs_range()
    ay = y.abs_range()
    return Interval(
        widen_down(math.hypot(ax.lo, ay.lo)),
        widen_up(math.hypot(ax.hi, ay.hi)),
    )


def iv_eval_arg(x: Interval, y: Interval) -> Interval:
    """Enclosure of arg over the box x × y, with arg in (-pi, pi].

    Raises :class:`BoxContainsOrigin` when the box touches the origin or
    the branch cut {x <= 0, y = 0}, where no continuous enclosure exists.
    For a convex box away from the cut, arg is monotone along each edge,
    so the extrema sit at corners.
    """
    if x.lo <= 0.0 and y.lo <= 0.0 <= y.hi:
        raise BoxContainsOrigin(f"box [{x.lo},{x.hi}]x[{y.lo},{y.hi}] meets origin or branch cut")
    corners = (
        math.atan2(y.lo, x.lo),
        math.atan2(y.lo, x.hi),
        math.atan2(y.hi, x.lo),
        math.atan2(y.hi, x.hi),
    )
    return Interval(widen_down(min(corners)), widen_up(max(corners)))


# ---------------------------------------------------------------------------
# Points, rotations


@dataclass(frozen=True)
class Point2:
    """Frequency-plane point xi = (xi1, xi2)."""

    x1: float
    x2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise InvalidParameter("Point2 components must be finite")

    def norm(self) -> float:
        return math.hypot(self.x1, self.x2)

    def arg(self) -> float:
        """Argument in (-pi, pi]; raises ZeroVector at the origin."""
        if self.x1 == 0.0 and self.x2 == 0.0:
            raise ZeroVector("arg undefined for the zero vector")
        a = math.atan2(self.x2, self.x1)
        if a <= -_PI:
            a += 2.0 * _PI
        return a


@dataclass(frozen=True)
class Point3:
    """Point (xi, eta) in R^2 x R."""

    x1: float
    x2: float
    eta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x1) and math.isfinite(self.x2) and math.isfinite(self.eta)):
            raise InvalidParameter("Point3 components must be finite")

    @property
    def xi(self) -> Point2:
        return Point2(self.x1, self.x2)


def rotate(p: Point2, sigma: float) -> Point2:
    """Rotation around the origin with rotate((1,0), sigma) = (cos s, sin s)."""
    c = math.cos(sigma)
    s = math.sin(sigma)
    return Point2(p.x1 * c - p.x2 * s, p.x1 * s + p.x2 * c)


# ---------------------------------------------------------------------------
# Rectangles and annuli


@dataclass(frozen=True)
class Rect2:
    """Rotated rectangle: the image under rotation about its center of
    center + [-half_width, half_width] x [-half_height, half_height]."""

    center: Point2
    half_width: float
    half_height: float
    rotation: float = 0.0

    def __post_init__(self) -> None:
        if self.half_width < 0.0 or self.half_height < 0.0:
            raise InvalidParameter("rectangle half-extents must be >= 0")
        if not (-_PI < self.rotation <= _PI):
            raise InvalidParameter("rectangle rotation must lie in (-pi, pi]")

    @classmethod
    def centered(cls, center: Point2, half_width: float, half_height: float) -> "Rect2":
        return cls(center, half_width, half_height)


@dataclass(frozen=True)
class Annulus:
    """A(alpha, beta) = { xi : alpha <= |xi| <= beta }."""

    inner: float
    outer: float

    def __post_init__(self) -> None:
        if self.inner < 0.0 or self.inner > self.outer:
            raise InvalidParameter("annulus requires 0 <= inner <= outer")


def _to_rect_frame(r: Rect2, p: Point2) -> tuple[float, float]:
    c = math.cos(r.rotation)
    s = math.sin(r.rotation)
    dx = p.x1 - r.center.x1
    dy = p.x2 - r.center.x2
    return dx * c + dy * s, -dx * s + dy * c


def rect_contains(r: Rect2, p: Point2, slack: float = DEFAULT_SLACK) -> Verdict:
    """Certified membership of p in the rectangle, slack-blurred at edges."""
    if slack < 0.0:
        raise InvalidParameter("slack must be >= 0")
    u, v = _to_rect_frame(r, p)
    return combine_all(
        band_verdict(u, -r.half_width, r.half_width, slack),
        band_verdict(v, -r.half_height, r.half_height, slack),
    )


def rect_norm_range(r: Rect2) -> Interval:
    """Exact min and max of |p| over the rectangle.

    Works in the rectangle's frame: place the origin at o, then the
    extrema over an axis-aligned box are separable per coordinate (0 if
    the box straddles o in that axis, else the nearer edge; max at the
    farther corner).
    """
    c = math.cos(r.rotation)
    s = math.sin(r.rotation)
    # origin in rect coordinates
    ox = -(r.center.x1 * c + r.center.x2 * s)
    oy = r.center.x1 * s - r.center.x2 * c
    gx = max(0.0, abs(ox) - r.half_width)
    gy = max(0.0, abs(oy) - r.half_height)
    lo = math.hypot(gx, gy)
    hi = math.hypot(abs(ox) + r.half_width, abs(oy) + r.half_height)
    return Interval(lo, hi)


def annulus_contains_rect(a: Annulus, r: Rect2) -> bool:
    rng = rect_norm_range(r)
    return a.inner <= rng.lo and rng.hi <= a.outer
