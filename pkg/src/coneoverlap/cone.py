"""Decomposition pieces of a thickened circular cone in R^3.

The plane is cut into angular sectors of width delta^(1/2); over a sector
and a radial interval J = [alpha, beta] (subset of [1, 2], width at most
delta^(1/2)) sits a slab: the set of (xi, eta) with arg xi in the sector,
|xi| in J and |eta - |xi|| <= delta.  Three variants are supported:

* standard      -- the slab above;
* enlarged      -- sector widened one step each side, radii padded by
                   2*delta, vertical thickness 6*delta (index set pi/7);
* eps           -- the open delta^(1-eps) neighborhood of the standard
                   slab in Euclidean distance.

Slabs are exactly parametrized by (theta, r, s) -> (r cos theta,
r sin theta, r + s); membership predicates invert that box.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .errors import (
    IndexOutOfRange,
    InvalidEpsilon,
    InvalidParameter,
    ParamOutOfRange,
    WrongVariant,
)
from .geom import (
    DEFAULT_SLACK,
    IN,
    OUT,
    UNKNOWN,
    Point2,
    Point3,
    Verdict,
    band_verdict,
    band_verdict_half_open,
    combine_all,
)

MAX_DELTA = 1e-2  # keeps delta^(1/2) <= 0.1 and the index sets nonempty
SECTOR_BOUND_STANDARD = math.pi / 8.0
SECTOR_BOUND_ENLARGED = math.pi / 7.0

# tolerance for validating user-supplied ranges against derived float
# quantities (e.g. |J| <= sqrt(delta) when beta was computed as
# alpha + sqrt(delta))
_VALIDATION_EPS = 1e-9


@dataclass(frozen=True)
class DecompositionParams:
    """Global configuration: fineness delta = 1/tau and the angular cutoff.

    sector_bound is pi/8 for the standard index set, pi/7 for the enlarged
    one, or a user value in (pi/2, pi) for the wide-cone counterexample.
    """

    delta: float
    sector_bound: float = SECTOR_BOUND_STANDARD

    def __post_init__(self) -> None:
        if not (0.0 < self.delta <= MAX_DELTA):
            raise InvalidParameter(f"delta must lie in (0, {MAX_DELTA}]; got {self.delta}")
        if not (0.0 < self.sector_bound < math.pi):
            raise InvalidParameter(f"sector_bound must lie in (0, pi); got {self.sector_bound}")

    @property
    def sqrt_delta(self) -> float:
        return math.sqrt(self.delta)

    @property
    def max_index(self) -> int:
        """Largest |mu| admitted by the index set (may be negative: empty)."""
        return math.floor(self.sector_bound / self.sqrt_delta - 1.0)

    @property
    def max_index_enlarged(self) -> int:
        return math.floor(SECTOR_BOUND_ENLARGED / self.sqrt_delta - 1.0)


def index_set(params: DecompositionParams) -> list[int]:
    """All sector indices mu with |mu| <= sector_bound/sqrt(delta) - 1."""
    m = params.max_index
    if m < 0:
        return []
    return list(range(-m, m + 1))


@dataclass(frozen=True)
class RadialInterval:
    """J = [alpha, beta] inside [1, 2]."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (1.0 <= self.alpha <= self.beta <= 2.0):
            raise InvalidParameter(
                f"radial interval must satisfy 1 <= alpha <= beta <= 2; got [{self.alpha}, {self.beta}]"
            )

    @property
    def width(self) -> float:
        return self.beta - self.alpha

    @classmethod
    def pinned(cls, left: float, delta: float, width: float | None = None) -> "RadialInterval":
        """Interval [left, left + width], width defaulting to sqrt(delta)."""
        w = math.sqrt(delta) if width is None else width
        return cls(left, min(left + w, 2.0))


@dataclass(frozen=True)
class SlabVariant:
    kind: str  # "standard" | "enlarged" | "eps"
    epsilon: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("standard", "enlarged", "eps"):
            raise InvalidParameter(f"unknown slab variant {self.kind!r}")
        if self.kind == "eps":
            if self.epsilon is None or not (0.0 < self.epsilon < 0.5):
                raise InvalidEpsilon(f"epsilon must lie in (0, 1/2); got {self.epsilon}")
        elif self.epsilon is not None:
            raise InvalidParameter("epsilon only applies to the eps variant")


STANDARD = SlabVariant("standard")
ENLARGED = SlabVariant("enlarged")


def eps_neighborhood(epsilon: float) -> SlabVariant:
    return SlabVariant("eps", epsilon)


@dataclass(frozen=True)
class SlabParam:
    """Parametrization coordinates of a slab point: angle, radius, vertical
    offset s = eta - r."""

    theta: float
    r: float
    s: float


@dataclass(frozen=True)
class ConeSlab:
    """One decomposition piece u_{mu,J} in one of the three variants."""

    params: DecompositionParams
    mu: int
    j: RadialInterval
    variant: SlabVariant = STANDARD

    def __post_init__(self) -> None:
        d = self.params.delta
        if self.j.width > math.sqrt(d) * (1.0 + _VALIDATION_EPS):
            raise InvalidParameter(
                f"|J| = {self.j.width} exceeds sqrt(delta) = {math.sqrt(d)}"
            )
        bound = (
            self.params.max_index_enlarged
            if self.variant.kind == "enlarged"
            else self.params.max_index
        )
        if abs(self.mu) > bound:
            raise IndexOutOfRange(
                f"|mu| = {abs(self.mu)} exceeds the index bound {bound} "
                f"for variant {self.variant.kind!r}"
            )

    # -- box geometry ------------------------------------------------------

    @property
    def angular_range(self) -> tuple[float, float]:
        """Half-open [lo, hi) of admissible arg xi."""
        h = self.params.sqrt_delta
        if self.variant.kind == "enlarged":
            return (self.mu - 1) * h, (self.mu + 2) * h
        return self.mu * h, (self.mu + 1) * h

    @property
    def radial_range(self) -> tuple[float, float]:
        if self.variant.kind == "enlarged":
            d = self.params.delta
            return self.j.alpha - 2.0 * d, self.j.beta + 2.0 * d
        return self.j.alpha, self.j.beta

    @property
    def vertical_half(self) -> float:
        if self.variant.kind == "enlarged":
            return 6.0 * self.params.delta
        return self.params.delta

    def as_standard(self) -> "ConeSlab":
        """The underlying standard slab (used by the eps variant)."""
        if self.variant.kind == "standard":
            return self
        return ConeSlab(self.params, self.mu, self.j, STANDARD)


def sector_contains(
    mu: int, xi: Point2, params: DecompositionParams, slack: float = DEFAULT_SLACK
) -> Verdict:
    """Certified half-open sector test mu*sqrt(delta) <= arg xi < (mu+1)*sqrt(delta)."""
    h = params.sqrt_delta
    return band_verdict_half_open(xi.arg(), mu * h, (mu + 1) * h, slack)


def slab_contains(slab: ConeSlab, p: Point3, slack: float = DEFAULT_SLACK) -> Verdict:
    """Certified slab membership (standard and enlarged variants)."""
    if slab.variant.kind == "eps":
        raise WrongVariant("use eps_slab_contains for the eps variant")
    rlo, rhi = slab.radial_range
    r = math.hypot(p.x1, p.x2)
    radial = band_verdict(r, rlo, rhi, slack)
    if radial.is_out:
        return OUT
    dv = slab.vertical_half
    vertical = band_verdict(p.eta - r, -dv, dv, slack)
    if vertical.is_out:
        return OUT
    # radial not Out forces r >= rlo - slack >= 0.9, so arg is defined
    alo, ahi = slab.angular_range
    angular = band_verdict_half_open(p.xi.arg(), alo, ahi, slack)
    return combine_all(radial, vertical, angular)


def slab_contains_exact(slab: ConeSlab, p: Point3, widen: float = 0.0) -> bool:
    """Exact half-open membership test, optionally widened.

    ``widen`` is a spatial (Euclidean) radius: a point within ``widen`` of
    a genuine member passes.  Radial band grows by widen, vertical by
    2*widen (eta and r both move), angular by 1.8*widen (chord-to-angle
    conversion at norms >= 0.9).
    """
    if slab.variant.kind == "eps":
        raise WrongVariant("use eps_slab_contains for the eps variant")
    rlo, rhi = slab.radial_range
    r = math.hypot(p.x1, p.x2)
    if not (rlo - widen <= r <= rhi + widen):
        return False
    dv = slab.vertical_half + 2.0 * widen
    if abs(p.eta - r) > dv:
        return False
    if r == 0.0:
        return False
    alo, ahi = slab.angular_range
    a = p.xi.arg()
    wa = 1.8 * widen
    return alo - wa <= a < ahi + wa


def slab_param_point(slab: ConeSlab, q: SlabParam) -> Point3:
    """Map parametrization coordinates to the slab point (r cos t, r sin t, r+s)."""
    if slab.variant.kind == "eps":
        raise WrongVariant("the eps variant has no box parametrization")
    alo, ahi = slab.angular_range
    if not (alo <= q.theta < ahi):
        raise ParamOutOfRange(f"theta = {q.theta} outside [{alo}, {ahi})")
    rlo, rhi = slab.radial_range
    if not (rlo <= q.r <= rhi):
        raise ParamOutOfRange(f"r = {q.r} outside [{rlo}, {rhi}]")
    dv = slab.vertical_half
    if abs(q.s) > dv:
        raise ParamOutOfRange(f"|s| = {abs(q.s)} exceeds {dv}")
    return Point3(q.r * math.cos(q.theta), q.r * math.sin(q.theta), q.r + q.s)


def slab_params_of(slab: ConeSlab, p: Point3) -> SlabParam:
    """Invert the parametrization: (arg xi, |xi|, eta - |xi|)."""
    r = math.hypot(p.x1, p.x2)
    return SlabParam(p.xi.arg(), r, p.eta - r)


def rotate_slab_index(mu: int, k: int, params: DecompositionParams) -> int:
    """Shift a sector index: rotation by k*sqrt(delta) maps sector mu onto mu+k."""
    target = mu + k
    if abs(target) > params.max_index:
        raise IndexOutOfRange(f"mu + k = {target} outside the index set (bound {params.max_index})")
    return target


def slab_nearest_point(slab: ConeSlab, x: Point3) -> Point3:
    """A slab point near x obtained by clamping parametrization coordinates.

    Gives an upper bound |x - q| >= dist(x, slab); not the true nearest
    point in general.
    """
    std = slab.as_standard()
    alo, ahi = std.angular_range
    rlo, rhi = std.radial_range
    dv = std.vertical_half
    if x.x1 == 0.0 and x.x2 == 0.0:
        theta = 0.5 * (alo + ahi)
    else:
        theta = min(max(x.xi.arg(), alo), ahi - 1e-15 * (1.0 + abs(ahi)))
    r = min(max(math.hypot(x.x1, x.x2), rlo), rhi)
    s = min(max(x.eta - r, -dv), dv)
    return Point3(r * math.cos(theta), r * math.sin(theta), r + s)


# ---------------------------------------------------------------------------
# Certified distance to a standard slab

_DIST_LIPSCHITZ = 3.0  # >= max radius 2 + slack; bounds |d(t1) - d(t2)| / |t1 - t2|
_DIST_FP_SLACK = 1e-12
_DIST_MAX_ITER = 50_000


def _angle_distance_sq(xi1: float, xi2: float, eta: float, nrm: float,
                       t: float, rlo: float, rhi: float, dv: float) -> float:
    """Exact min over (r, s) of |(xi,eta) - (r cos t, r sin t, r+s)|^2.

    For fixed t the objective is convex piecewise-quadratic in r after
    clamping s, so the minimum sits at a clamped stationary point of one
    of the three vertical regimes or at an endpoint of [rlo, rhi].
    """
    c = xi1 * math.cos(t) + xi2 * math.sin(t)
    cands = [rlo, rhi]
    lo1, hi1 = rlo, min(rhi, eta - dv)
    if lo1 <= hi1:
        cands.append(min(max(0.5 * (c + eta - dv), lo1), hi1))
    lo2, hi2 = max(rlo, eta - dv), min(rhi, eta + dv)
    if lo2 <= hi2:
        cands.append(min(max(c, lo2), hi2))
    lo3, hi3 = max(rlo, eta + dv), rhi
    if lo3 <= hi3:
        cands.append(min(max(0.5 * (c + eta + dv), lo3), hi3))
    best = math.inf
    nsq = nrm * nrm
    for r in cands:
        vert = max(abs(eta - r) - dv, 0.0)
        val = nsq - 2.0 * r * c + r * r + vert * vert
        if val < best:
            best = val
    return max(best, 0.0)


def _band_distance_bracket(
    p: Point3,
    t0: float,
    t1: float,
    rlo: float,
    rhi: float,
    dv: float,
    resolution: float,
    max_iter: int = _DIST_MAX_ITER,
) -> tuple[float, float]:
    """Certified distance bracket from p to the slab-shaped set with the
    given sector, radial and vertical bands (closure of the half-open
    sector; the infimum is unchanged).

    Outer Piyavskii search over theta with Lipschitz constant 3 (slab
    points move at most max-radius <= 2 per unit angle); the inner (r, s)
    problem is solved in closed form.
    """
    xi1, xi2, eta = p.x1, p.x2, p.eta
    nrm = math.hypot(xi1, xi2)

    def d_at(t: float) -> float:
        return math.sqrt(_angle_distance_sq(xi1, xi2, eta, nrm, t, rlo, rhi, dv))

    da, db = d_at(t0), d_at(t1)
    best_ub = min(da, db)
    lb0 = max(0.0, 0.5 * (da + db - _DIST_LIPSCHITZ * (t1 - t0)))
    heap = [(lb0, t0, t1, da, db)]
    lower = lb0
    for _ in range(max_iter):
        lb, a, b, fa, fb = heapq.heappop(heap)
        lower = lb
        if best_ub - lb <= resolution:
            break
        m = 0.5 * (a + b)
        fm = d_at(m)
        if fm < best_ub:
            best_ub = fm
        w = 0.5 * (b - a)
        heapq.heappush(heap, (max(0.0, 0.5 * (fa + fm - _DIST_LIPSCHITZ * w)), a, m, fa, fm))
        heapq.heappush(heap, (max(0.0, 0.5 * (fm + fb - _DIST_LIPSCHITZ * w)), m, b, fm, fb))
        if heap[0][0] > lower:
            lower = heap[0][0]
    else:
        lower = heap[0][0] if heap else lower
    return max(0.0, lower - _DIST_FP_SLACK), best_ub + _DIST_FP_SLACK


def slab_distance(
    slab: ConeSlab,
    p: Point3,
    resolution: float | None = None,
    max_iter: int = _DIST_MAX_ITER,
) -> tuple[float, float]:
    """Certified bracket on the Euclidean distance from p to the slab.

    The bracket satisfies ``upper - lower <= resolution`` (default
    1e-3 * sqrt(delta)) unless ``max_iter`` is hit, in which case a wider
    but still sound bracket is returned.
    """
    if slab.variant.kind != "standard":
        raise WrongVariant("slab_distance is defined for the standard variant")
    if resolution is None:
        resolution = 1e-3 * slab.params.sqrt_delta
    t0, t1 = slab.angular_range
    rlo, rhi = slab.radial_range
    return _band_distance_bracket(
        p, t0, t1, rlo, rhi, slab.vertical_half, resolution, max_iter
    )


def eps_slab_contains(
    slab: ConeSlab,
    p: Point3,
    slack: float = DEFAULT_SLACK,
    resolution: float | None = None,
) -> Verdict:
    """Certified membership in the delta^(1-eps) neighborhood slab."""
    if slab.variant.kind != "eps":
        raise WrongVariant("eps_slab_contains requires the eps variant")
    eps = slab.variant.epsilon
    assert eps is not None
    threshold = slab.params.delta ** (1.0 - eps)
    if resolution is None:
        resolution = min(1e-3 * slab.params.sqrt_delta, 0.01 * threshold)
    lo, up = slab_distance(slab.as_standard(), p, resolution=resolution)
    if up < threshold - slack:
        return IN
    if lo > threshold + slack:
        return OUT
    return UNKNOWN
