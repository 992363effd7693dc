"""Certified and brute-force membership oracles for sums of two slabs.

``sum_contains_certified`` runs a branch-and-bound over the parameters of
the first slab only.  The vertical offsets of both slabs enter membership
solely through their sum, so they are eliminated exactly: p lies in
slab_a + slab_b iff some (theta, r) in slab_a's sector-radial box puts the
planar residual xi' = xi - r e(theta) inside slab_b's sector and radial
bands with |eta - r - |xi'|| at most the two vertical half-thicknesses
combined.  Each sub-box of the remaining 2-d parameter box is tested with
interval arithmetic; a sub-box satisfying every band with margin beyond
the slack certifies In, one violating a band beyond the slack is
discarded, and Out is the verdict once every sub-box is discarded.

Plain interval evaluation of |xi - r e(theta)| is badly pessimistic in r
(the true sensitivity of the vertical constraint is -1 + cos phi, with
phi the angle between the residual and e(theta)), so the norm and
vertical bounds use certified mean-value forms: value at the box center
plus interval enclosures of the partial derivatives times the box
half-widths.  Sub-boxes split along the wider scaled coordinate (theta
and r both scale by delta^(-1/2)).

Floating-point soundness: bounds are computed in double arithmetic and
every comparison carries a fixed outward guard dominating the accumulated
rounding error (< 40 ulps at magnitudes <= 20), so In/Out claims remain
certified.

The eps-neighborhood variant reduces to a certified distance test:
balls add under Minkowski sums, so ntilde(A) + ntilde(B) is exactly
{ x : dist(x, A + B) < 2 delta^(1-eps) }, and dist(x, A + B) =
min over a in A of dist(x - a, B).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cone import ConeSlab, _band_distance_bracket
from .errors import InvalidSample, WrongVariant
from .geom import (
    DEFAULT_SLACK,
    IN,
    OUT,
    UNKNOWN,
    UNKNOWN_BUDGET,
    Point3,
    Verdict,
    _cos_bounds,
    _sin_bounds,
)

# Outward guard covering accumulated double rounding in the bound
# computations; added on top of the user slack at every comparison.
_FP_GUARD = 2e-13

_PI = math.pi
_TWO_PI = 2.0 * math.pi
_HALF_PI = math.pi / 2.0
_SQRT2 = math.sqrt(2.0)


def _arc_disjoint(glo: float, ghi: float, alo: float, ahi: float, guard: float) -> bool:
    """Certified: every direction in the (possibly wrapped) range misses
    the sector band.  Sector bands never reach +-pi, so the two
    unwrappings k in {0, -2 pi} cover all representations."""
    for k in (0.0, -_TWO_PI):
        if not (ghi + k < alo - guard or glo + k > ahi + guard):
            return False
    return True


def _arc_inside(glo: float, ghi: float, alo: float, ahi: float, guard: float) -> bool:
    """Certified: every direction in the range is interior to the band."""
    for k in (0.0, -_TWO_PI):
        if glo + k > alo + guard and ghi + k < ahi - guard:
            return True
    return False


def _arc_gap(glo: float, ghi: float, alo: float, ahi: float) -> float:
    """Lower bound on the angular distance from the range to the band."""
    gap = math.inf
    for k in (0.0, -_TWO_PI):
        gap = min(gap, max(0.0, alo - (ghi + k), (glo + k) - ahi))
    return gap


@dataclass(frozen=True)
class SearchBudget:
    """Branch-and-bound budget.

    ``min_box_width`` is measured in the scaled coordinates (theta and r
    in units of delta^(1/2)); ``None`` means the default 1e-4 * delta.
    """

    max_boxes: int = 100_000
    min_box_width: float | None = None

    def __post_init__(self) -> None:
        if self.max_boxes < 1:
            raise InvalidSample("max_boxes must be >= 1")

    def effective_min_width(self, delta: float) -> float:
        return 1e-4 * delta if self.min_box_width is None else self.min_box_width


DEFAULT_BUDGET = SearchBudget()


@dataclass(frozen=True)
class SumSpec:
    """The algebraic sum slab_a + slab_b."""

    slab_a: ConeSlab
    slab_b: ConeSlab

    def __post_init__(self) -> None:
        if self.slab_a.params.delta != self.slab_b.params.delta:
            raise WrongVariant("both slabs must share the same delta")
        if (self.slab_a.variant.kind == "eps") != (self.slab_b.variant.kind == "eps"):
            raise WrongVariant("cannot mix eps and non-eps slabs in a sum")
        if self.slab_a.variant.kind == "eps" and (
            self.slab_a.variant.epsilon != self.slab_b.variant.epsilon
        ):
            raise WrongVariant("eps slabs in a sum must share epsilon")


def _enclosing_ball(slab: ConeSlab) -> tuple[float, float, float, float]:
    """Center and radius of a ball containing the slab (eps inflated)."""
    std = slab.as_standard()
    t0, t1 = std.angular_range
    r0, r1 = std.radial_range
    dv = std.vertical_half
    tm = 0.5 * (t0 + t1)
    rm = 0.5 * (r0 + r1)
    dr = 0.5 * (r1 - r0)
    dt = 0.5 * (t1 - t0)
    planar = dr + r1 * dt
    vertical = dr + dv
    rad = math.hypot(planar, vertical)
    if slab.variant.kind == "eps":
        rad += slab.params.delta ** (1.0 - slab.variant.epsilon)
    return rm * math.cos(tm), rm * math.sin(tm), rm, rad


def quick_reject(spec: SumSpec, p: Point3, slack: float = DEFAULT_SLACK) -> bool:
    """True only if p is provably outside the sum of the bounding balls."""
    ax, ay, ah, ar = _enclosing_ball(spec.slab_a)
    bx, by, bh, br = _enclosing_ball(spec.slab_b)
    d = math.sqrt(
        (p.x1 - ax - bx) ** 2 + (p.x2 - ay - by) ** 2 + (p.eta - ah - bh) ** 2
    )
    return d > ar + br + slack + _FP_GUARD


class _ResidualGeometry:
    """Per-(spec, p) engine state: bands of the target slab and certified
    bounds for the constraint functions over (theta, r) boxes."""

    __slots__ = (
        "x1", "x2", "eta", "pnorm", "parg",
        "alo", "ahi", "rlo", "rhi", "dv",
    )

    def __init__(self, p: Point3, alo: float, ahi: float, rlo: float, rhi: float, dv: float):
        self.x1 = p.x1
        self.x2 = p.x2
        self.eta = p.eta
        self.pnorm = math.hypot(p.x1, p.x2)
        self.parg = math.atan2(p.x2, p.x1) if self.pnorm > 0.0 else 0.0
        self.alo = alo
        self.ahi = ahi
        self.rlo = rlo
        self.rhi = rhi
        self.dv = dv

    def box_bounds(self, t0, t1, r0, r1):
        """Certified bounds over the box: returns
        (nlo, nhi, wlo, whi, arg_ok, glo, ghi)
        for n = |xi - r e(theta)|, w = eta - r - n and the residual arg."""
        # naive residual rectangle
        clo, chi = _cos_bounds(t0, t1)
        slo, shi = _sin_bounds(t0, t1)
        xa = (r0 * clo, r0 * chi, r1 * clo, r1 * chi)
        ya = (r0 * slo, r0 * shi, r1 * slo, r1 * shi)
        xlo = self.x1 - max(xa)
        xhi = self.x1 - min(xa)
        ylo = self.x2 - max(ya)
        yhi = self.x2 - min(ya)
        if xlo <= 0.0 <= xhi and ylo <= 0.0 <= yhi:
            n0x = n0y = 0.0
        else:
            n0x = 0.0 if xlo <= 0.0 <= xhi else min(abs(xlo), abs(xhi))
            n0y = 0.0 if ylo <= 0.0 <= yhi else min(abs(ylo), abs(yhi))
        nlo = math.hypot(n0x, n0y)
        nhi = math.hypot(max(abs(xlo), abs(xhi)), max(abs(ylo), abs(yhi)))

        if not (xlo <= 0.0 and ylo <= 0.0 <= yhi):
            arg_ok = True
            corners = (
                math.atan2(ylo, xlo),
                math.atan2(ylo, xhi),
                math.atan2(yhi, xlo),
                math.atan2(yhi, xhi),
            )
            glo = min(corners) - _FP_GUARD
            ghi = max(corners) + _FP_GUARD
        elif xhi < 0.0:
            # box straddles the branch cut but not the origin: measure the
            # direction range in the flipped frame and shift by pi, giving
            # a wrapped range in (0, 2 pi); band tests try both unwrappings
            arg_ok = True
            corners = (
                math.atan2(-yhi, -xhi),
                math.atan2(-yhi, -xlo),
                math.atan2(-ylo, -xhi),
                math.atan2(-ylo, -xlo),
            )
            glo = min(corners) + _PI - _FP_GUARD
            ghi = max(corners) + _PI + _FP_GUARD
        else:
            # origin inside the box: no angular information
            arg_ok = False
            glo = -4.0
            ghi = 4.0

        # centered mean-value forms for n and w = eta - r - n, sound via
        # interval enclosures of the partials over the box
        wlo_n = self.eta - r1 - nhi
        whi_n = self.eta - r0 - nlo
        if nlo > 0.25:
            tc = 0.5 * (t0 + t1)
            rc = 0.5 * (r0 + r1)
            ht = 0.5 * (t1 - t0)
            hr = 0.5 * (r1 - r0)
            xc = self.x1 - rc * math.cos(tc)
            yc = self.x2 - rc * math.sin(tc)
            nc = math.hypot(xc, yc)
            # d n / d theta = -(r |xi| / n) sin(parg - theta)
            qlo, qhi = _sin_bounds(self.parg - t1, self.parg - t0)
            m_sin = max(abs(qlo), abs(qhi))
            m_dth = r1 * self.pnorm * m_sin / nlo
            # d n / d r = -cos phi, cos phi = (|xi| cos(parg - theta) - r)/n
            klo, khi = _cos_bounds(self.parg - t1, self.parg - t0)
            num_lo = self.pnorm * klo - r1
            num_hi = self.pnorm * khi - r0
            c_lo = max(-1.0, min(num_lo / nlo, num_lo / nhi) if num_lo >= 0 else num_lo / nlo)
            c_hi = min(1.0, max(num_hi / nlo, num_hi / nhi) if num_hi <= 0 else num_hi / nlo)
            if c_lo > c_hi:
                c_lo, c_hi = -1.0, 1.0
            slop_n = m_dth * ht + max(abs(c_lo), abs(c_hi)) * hr + _FP_GUARD
            nlo = max(nlo, nc - slop_n)
            nhi = min(nhi, nc + slop_n)
            # d w / d r = -1 + cos phi
            m_wr = max(abs(c_lo - 1.0), abs(c_hi - 1.0))
            slop_w = m_dth * ht + m_wr * hr + _FP_GUARD
            wc = self.eta - rc - nc
            wlo_n = max(wlo_n, wc - slop_w)
            whi_n = min(whi_n, wc + slop_w)
        return nlo, nhi, wlo_n, whi_n, arg_ok, glo, ghi

    def point_values(self, t: float, r: float) -> tuple[float, float, float, float]:
        """Exact (n, w, arg, valid) at a parameter point."""
        x = self.x1 - r * math.cos(t)
        y = self.x2 - r * math.sin(t)
        n = math.hypot(x, y)
        w = self.eta - r - n
        if n == 0.0:
            return n, w, 0.0, False
        return n, w, math.atan2(y, x), True

    def center_margin(self, t0: float, t1: float, r0: float, r1: float) -> float:
        """Worst band margin at the box center (negative when outside)."""
        n, w, g, ok = self.point_values(0.5 * (t0 + t1), 0.5 * (r0 + r1))
        m = min(n - self.rlo, self.rhi - n, self.dv - abs(w))
        if ok:
            return min(m, g - self.alo, self.ahi - g)
        return -4.0


def _sum_feasible_box(spec: SumSpec) -> tuple[float, float, float, float, float, "_ResidualGeometry | None"]:
    a, b = spec.slab_a, spec.slab_b
    t0, t1 = a.angular_range
    r0, r1 = a.radial_range
    dv = a.vertical_half + b.vertical_half
    return t0, t1, r0, r1, dv, None


def sum_contains_certified(
    spec: SumSpec,
    p: Point3,
    budget: SearchBudget = DEFAULT_BUDGET,
    slack: float = DEFAULT_SLACK,
) -> Verdict:
    """Certified membership of p in slab_a + slab_b (standard/enlarged)."""
    a, b = spec.slab_a, spec.slab_b
    if a.variant.kind == "eps":
        raise WrongVariant("use eps_sum_contains for eps-neighborhood sums")
    delta = a.params.delta
    guard = slack + _FP_GUARD
    t0, t1 = a.angular_range
    r0, r1 = a.radial_range
    dv = a.vertical_half + b.vertical_half
    rlo_b, rhi_b = b.radial_range
    alo_b, ahi_b = b.angular_range
    geom = _ResidualGeometry(p, alo_b, ahi_b, rlo_b, rhi_b, dv)

    # presolve r from the vertical equation eta - r - n = w, |w| <= dv
    pr0 = max(r0, p.eta - rhi_b - dv - guard)
    pr1 = min(r1, p.eta - rlo_b + dv + guard)
    if pr0 > pr1:
        return OUT

    inv_sq = 1.0 / math.sqrt(delta)
    min_w = budget.effective_min_width(delta)

    stack = [(t0, t1, pr0, pr1)]
    processed = 0
    slack_limited = False
    while stack:
        processed += 1
        if processed > budget.max_boxes:
            return UNKNOWN_BUDGET
        bt0, bt1, br0, br1 = stack.pop()
        nlo, nhi, wlo, whi, arg_ok, glo, ghi = geom.box_bounds(bt0, bt1, br0, br1)
        if nhi < rlo_b - guard or nlo > rhi_b + guard:
            continue
        if whi < -dv - guard or wlo > dv + guard:
            continue
        if arg_ok and _arc_disjoint(glo, ghi, alo_b, ahi_b, guard):
            continue
        if (
            arg_ok
            and nlo > rlo_b + guard
            and nhi < rhi_b - guard
            and wlo > -dv + guard
            and whi < dv - guard
            and _arc_inside(glo, ghi, alo_b, ahi_b, guard)
        ):
            return IN
        n, w, g, ok = geom.point_values(0.5 * (bt0 + bt1), 0.5 * (br0 + br1))
        if (
            ok
            and rlo_b + guard < n < rhi_b - guard
            and -dv + guard < w < dv - guard
            and alo_b + guard < g < ahi_b - guard
        ):
            return IN

        wt = (bt1 - bt0) * inv_sq
        wr = (br1 - br0) * inv_sq
        if wt <= min_w and wr <= min_w:
            slack_limited = True
            continue
        if wt >= wr:
            m = 0.5 * (bt0 + bt1)
            kids = ((bt0, m, br0, br1), (m, bt1, br0, br1))
        else:
            m = 0.5 * (br0 + br1)
            kids = ((bt0, bt1, br0, m), (bt0, bt1, m, br1))
        # explore the child with the better interior margin first, so the
        # search cannot drown in slack-thin boundary boxes before finding
        # a fat feasible region (ordering only; verdicts are unaffected)
        m0 = geom.center_margin(*kids[0])
        m1 = geom.center_margin(*kids[1])
        if m0 >= m1:
            stack.append(kids[1])
            stack.append(kids[0])
        else:
            stack.append(kids[0])
            stack.append(kids[1])
    return UNKNOWN if slack_limited else OUT


def sum_contains_bruteforce(
    spec: SumSpec,
    p: Point3,
    grid_per_axis: int,
    widen: float | None = None,
) -> bool:
    """Grid-sampling membership oracle, independent of the certified engine.

    Samples slab_a parameters at cell centers of a regular full 3-d
    (theta, r, s) grid and tests each residual against slab_b's exact
    half-open predicate with its bands widened by ``widen`` (default: the
    grid's spatial covering radius, so any genuine member yields a hit;
    pass 0.0 for strict witnesses only).
    """
    if grid_per_axis < 2:
        raise InvalidSample("grid_per_axis must be >= 2")
    a, b = spec.slab_a, spec.slab_b
    if a.variant.kind == "eps":
        raise WrongVariant("brute force is defined for standard/enlarged sums")
    t0, t1 = a.angular_range
    r0, r1 = a.radial_range
    dva = a.vertical_half
    n = grid_per_axis
    ht = (t1 - t0) / n
    hr = (r1 - r0) / n
    hs = 2.0 * dva / n
    if widen is None:
        planar = 0.5 * hr + r1 * 0.5 * ht
        vertical = 0.5 * hr + 0.5 * hs
        widen = math.hypot(planar, vertical)

    ts = t0 + (np.arange(n) + 0.5) * ht
    rs = r0 + (np.arange(n) + 0.5) * hr
    ss = -dva + (np.arange(n) + 0.5) * hs
    tg, rg, sg = np.meshgrid(ts, rs, ss, indexing="ij")
    x = p.x1 - rg * np.cos(tg)
    y = p.x2 - rg * np.sin(tg)
    h = p.eta - rg - sg

    rlo_b, rhi_b = b.radial_range
    alo_b, ahi_b = b.angular_range
    dvb = b.vertical_half
    nrm = np.hypot(x, y)
    ok = (nrm >= rlo_b - widen) & (nrm <= rhi_b + widen)
    ok &= np.abs(h - nrm) <= dvb + 2.0 * widen
    ok &= nrm > 0.0
    if not ok.any():
        return False
    ang = np.arctan2(y[ok], x[ok])
    wa = 1.8 * widen
    hits = (ang >= alo_b - wa) & (ang < ahi_b + wa)
    return bool(hits.any())


# ---------------------------------------------------------------------------
# eps-neighborhood sums via certified distance to A + B


def eps_sum_contains(
    spec: SumSpec,
    p: Point3,
    budget: SearchBudget = DEFAULT_BUDGET,
    slack: float = DEFAULT_SLACK,
) -> Verdict:
    """Certified membership in ntilde(slab_a) + ntilde(slab_b)."""
    a = spec.slab_a
    if a.variant.kind != "eps":
        raise WrongVariant("eps_sum_contains requires eps-variant slabs")
    eps = a.variant.epsilon
    assert eps is not None
    radius = 2.0 * a.params.delta ** (1.0 - eps)
    return _sum_within_distance(
        a.as_standard(), spec.slab_b.as_standard(), p, radius, budget, slack
    )


def _sum_within_distance(
    a: ConeSlab,
    b: ConeSlab,
    p: Point3,
    radius: float,
    budget: SearchBudget,
    slack: float,
) -> Verdict:
    """Certified test of dist(p, a + b) < radius.

    Branch-and-bound over a's (theta, r) box; the vertical offset of a is
    folded into b's thickness (a vertical segment adds exactly to the
    vertical band), and dist of the planar residual to the fattened b is
    bounded below by coordinate gap formulas and above by an explicit
    clamped point, with a tight certified bracket on small boxes.
    """
    delta = a.params.delta
    guard = slack + _FP_GUARD
    t0, t1 = a.angular_range
    r0, r1 = a.radial_range
    dv = a.vertical_half + b.vertical_half
    rlo_b, rhi_b = b.radial_range
    alo_b, ahi_b = b.angular_range
    geom = _ResidualGeometry(p, alo_b, ahi_b, rlo_b, rhi_b, dv)

    pr0 = max(r0, p.eta - rhi_b - dv - radius - guard)
    pr1 = min(r1, p.eta - rlo_b + dv + radius + guard)
    if pr0 > pr1:
        return OUT

    inv_sq = 1.0 / math.sqrt(delta)
    min_w = budget.effective_min_width(delta)
    # distance comparisons are resolved at a radius-relative resolution;
    # boxes whose residual displacement falls below the stop scale cannot
    # sharpen the verdict further and report slack-limited Unknown
    sd_resolution = 1e-3 * radius
    stop_rho = 4.0 * sd_resolution

    def upper_at(t: float, r: float) -> float:
        # clamp-projection of the residual onto the fattened slab b
        x = p.x1 - r * math.cos(t)
        y = p.x2 - r * math.sin(t)
        h = p.eta - r
        if x == 0.0 and y == 0.0:
            ta = 0.5 * (alo_b + ahi_b)
        else:
            ta = min(max(math.atan2(y, x), alo_b), ahi_b)
        rr = min(max(math.hypot(x, y), rlo_b), rhi_b)
        s = min(max(h - rr, -dv), dv)
        return math.sqrt(
            (x - rr * math.cos(ta)) ** 2
            + (y - rr * math.sin(ta)) ** 2
            + (h - rr - s) ** 2
        )

    stack = [(t0, t1, pr0, pr1)]
    processed = 0
    slack_limited = False
    while stack:
        processed += 1
        if processed > budget.max_boxes:
            return UNKNOWN_BUDGET
        bt0, bt1, br0, br1 = stack.pop()
        nlo, nhi, wlo, whi, arg_ok, glo, ghi = geom.box_bounds(bt0, bt1, br0, br1)

        g_r = max(0.0, rlo_b - nhi, nlo - rhi_b)
        g_a = 0.0
        if arg_ok:
            phi = _arc_gap(glo, ghi, alo_b, ahi_b)
            if phi > 0.0:
                g_a = nlo * math.sin(min(phi, _HALF_PI))
        hlo = p.eta - br1
        hhi = p.eta - br0
        g_h = max(0.0, (rlo_b - dv) - hhi, hlo - (rhi_b + dv))
        wabs = 0.0 if wlo <= 0.0 <= whi else min(abs(wlo), abs(whi))
        g_v = max(0.0, wabs - dv) / _SQRT2
        lb = max(math.hypot(max(g_r, g_a), g_h), g_v) - _FP_GUARD
        if lb > radius + slack:
            continue

        ct = 0.5 * (bt0 + bt1)
        cr = 0.5 * (br0 + br1)
        if upper_at(ct, cr) + _FP_GUARD < radius - slack:
            return IN

        # residual displacement within the box from its center
        hr_half = 0.5 * (br1 - br0)
        planar = hr_half + r1 * 0.5 * (bt1 - bt0)
        rho = math.hypot(planar, hr_half)
        if rho <= 2.0 * radius:
            # tight certified bracket at the center, Lipschitz-corrected
            xc = Point3(p.x1 - cr * math.cos(ct), p.x2 - cr * math.sin(ct), p.eta - cr)
            d_lo, d_hi = _band_distance_bracket(
                xc, alo_b, ahi_b, rlo_b, rhi_b, dv, sd_resolution
            )
            if d_hi + _FP_GUARD < radius - slack:
                return IN
            if d_lo - rho - _FP_GUARD > radius + slack:
                continue
        wt = (bt1 - bt0) * inv_sq
        wr = (br1 - br0) * inv_sq
        if rho <= stop_rho or (wt <= min_w and wr <= min_w):
            slack_limited = True
            continue
        if wt >= wr:
            m = 0.5 * (bt0 + bt1)
            kids = ((bt0, m, br0, br1), (m, bt1, br0, br1))
        else:
            m = 0.5 * (br0 + br1)
            kids = ((bt0, bt1, br0, m), (bt0, bt1, m, br1))
        # nearest-first child order: dive toward the smallest distance
        u0 = upper_at(0.5 * (kids[0][0] + kids[0][1]), 0.5 * (kids[0][2] + kids[0][3]))
        u1 = upper_at(0.5 * (kids[1][0] + kids[1][1]), 0.5 * (kids[1][2] + kids[1][3]))
        if u0 <= u1:
            stack.append(kids[1])
            stack.append(kids[0])
        else:
            stack.append(kids[0])
            stack.append(kids[1])
    return UNKNOWN if slack_limited else OUT


def pair_contains(
    spec: SumSpec,
    p: Point3,
    budget: SearchBudget = DEFAULT_BUDGET,
    slack: float = DEFAULT_SLACK,
) -> Verdict:
    """Dispatch to the engine matching the spec's variant."""
    if spec.slab_a.variant.kind == "eps":
        return eps_sum_contains(spec, p, budget, slack)
    return sum_contains_certified(spec, p, budget, slack)
