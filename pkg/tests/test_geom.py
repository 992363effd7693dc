import math

import numpy as np
import pytest

from coneoverlap.errors import BoxContainsOrigin, InvalidParameter, ZeroVector
from coneoverlap.geom import (
    Annulus,
    Interval,
    Point2,
    Rect2,
    annulus_contains_rect,
    band_verdict_half_open,
    iv_eval_arg,
    iv_eval_norm,
    rect_contains,
    rect_norm_range,
    rotate,
)


def test_rotate_quarter_turn():
    p = rotate(Point2(1.0, 0.0), math.pi / 2.0)
    assert abs(p.x1) < 1e-15 and abs(p.x2 - 1.0) < 1e-15


def test_rotate_identity():
    p = rotate(Point2(2.0, 0.0), 0.0)
    assert p.x1 == 2.0 and p.x2 == 0.0


def test_rotate_point_reflection():
    p = rotate(Point2(1.0, 1.0), math.pi)
    assert abs(p.x1 + 1.0) < 1e-15 and abs(p.x2 + 1.0) < 1e-15


def test_rotation_is_isometry():
    rng = np.random.default_rng(0)
    for _ in range(200):
        p = Point2(*rng.normal(size=2))
        q = Point2(*rng.normal(size=2))
        sigma = float(rng.uniform(-math.pi, math.pi))
        d0 = math.hypot(p.x1 - q.x1, p.x2 - q.x2)
        rp, rq = rotate(p, sigma), rotate(q, sigma)
        d1 = math.hypot(rp.x1 - rq.x1, rp.x2 - rq.x2)
        assert abs(d0 - d1) <= 1e-12 * max(1.0, d0)


def test_rotation_roundtrip():
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = Point2(*rng.normal(size=2))
        sigma = float(rng.uniform(-math.pi, math.pi))
        q = rotate(rotate(p, sigma), -sigma)
        assert abs(q.x1 - p.x1) <= 1e-12 * (1.0 + abs(p.x1))
        assert abs(q.x2 - p.x2) <= 1e-12 * (1.0 + abs(p.x2))


def test_norm_point_box():
    r = iv_eval_norm(Interval.point(1.0), Interval.point(0.0))
    assert r.lo <= 1.0 <= r.hi and r.width < 1e-12


def test_norm_unit_box_contains_range():
    r = iv_eval_norm(Interval(-1.0, 1.0), Interval(-1.0, 1.0))
    assert r.lo <= 0.0 and r.hi >= math.sqrt(2.0)


def test_norm_axis_segment():
    r = iv_eval_norm(Interval(3.0, 4.0), Interval.point(0.0))
    assert r.lo <= 3.0 <= 4.0 <= r.hi and r.width < 1.0 + 1e-9


def test_arg_point():
    r = iv_eval_arg(Interval.point(1.0), Interval.point(0.0))
    assert r.lo <= 0.0 <= r.hi and r.width < 1e-12


def test_arg_symmetric_box():
    r = iv_eval_arg(Interval.point(1.0), Interval(-1.0, 1.0))
    assert r.lo <= -math.pi / 4.0 and r.hi >= math.pi / 4.0


def test_arg_origin_box_raises():
    with pytest.raises(BoxContainsOrigin):
        iv_eval_arg(Interval(-1.0, 1.0), Interval(-1.0, 1.0))


def test_arg_branch_cut_raises():
    with pytest.raises(BoxContainsOrigin):
        iv_eval_arg(Interval(-2.0, -1.0), Interval(-0.5, 0.5))


def test_enclosure_soundness_sampled():
    # norm/arg enclosures contain the pointwise values on random boxes
    rng = np.random.default_rng(2)
    for _ in range(10):
        cx, cy = rng.uniform(-3, 3, size=2)
        wx, wy = rng.uniform(0.01, 1.0, size=2)
        xi = Interval(cx - wx, cx + wx)
        yi = Interval(cy - wy, cy + wy)
        xs = rng.uniform(xi.lo, xi.hi, size=1000)
        ys = rng.uniform(yi.lo, yi.hi, size=1000)
        nr = iv_eval_norm(xi, yi)
        norms = np.hypot(xs, ys)
        assert nr.lo <= norms.min() and norms.max() <= nr.hi
        try:
            ar = iv_eval_arg(xi, yi)
        except BoxContainsOrigin:
            continue
        args = np.arctan2(ys, xs)
        assert ar.lo <= args.min() and args.max() <= ar.hi


def test_interval_arithmetic_encloses():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = Interval(*sorted(rng.normal(size=2)))
        b = Interval(*sorted(rng.normal(size=2)))
        xs = rng.uniform(a.lo, a.hi, size=50)
        ys = rng.uniform(b.lo, b.hi, size=50)
        s = a + b
        assert s.lo <= (xs + ys).min() and (xs + ys).max() <= s.hi
        d = a - b
        assert d.lo <= (xs - ys).min() and (xs - ys).max() <= d.hi
        m = a * b
        assert m.lo <= (xs * ys).min() and (xs * ys).max() <= m.hi


def test_interval_validation():
    with pytest.raises(InvalidParameter):
        Interval(1.0, 0.0)


def test_point_arg_zero_vector():
    with pytest.raises(ZeroVector):
        Point2(0.0, 0.0).arg()


def _segment_norm_range(p, q, n=1):
    # exact distance-to-origin range over a segment via the projected foot
    px, py = p
    qx, qy = q
    dx, dy = qx - px, qy - py
    dd = dx * dx + dy * dy
    cands = [math.hypot(px, py), math.hypot(qx, qy)]
    if dd > 0:
        t = -(px * dx + py * dy) / dd
        if 0.0 < t < 1.0:
            cands.append(math.hypot(px + t * dx, py + t * dy))
    return min(cands), max(cands)


def _norm_range_oracle(r: Rect2):
    # independent corner/edge-foot analysis plus an origin-inside test
    c, s = math.cos(r.rotation), math.sin(r.rotation)
    corners = []
    for su in (-1.0, 1.0):
        for sv in (-1.0, 1.0):
            u, v = su * r.half_width, sv * r.half_height
            corners.append((r.center.x1 + u * c - v * s, r.center.x2 + u * s + v * c))
    a, b, d, e = corners  # (-,-), (-,+), (+,-), (+,+)
    edges = [(a, b), (a, d), (e, b), (e, d)]
    lo, hi = math.inf, 0.0
    for p, q in edges:
        l2, h2 = _segment_norm_range(p, q)
        lo, hi = min(lo, l2), max(hi, h2)
    u, v = -(r.center.x1 * c + r.center.x2 * s), r.center.x1 * s - r.center.x2 * c
    if abs(u) <= r.half_width and abs(v) <= r.half_height:
        lo = 0.0
    return lo, hi


def test_rect_norm_range_against_oracle():
    rng = np.random.default_rng(4)
    for _ in range(100):
        rect = Rect2(
            Point2(*rng.uniform(-3, 3, size=2)),
            float(rng.uniform(0.0, 2.0)),
            float(rng.uniform(0.0, 2.0)),
            float(rng.uniform(-math.pi, math.pi / 1.0001)),
        )
        got = rect_norm_range(rect)
        lo, hi = _norm_range_oracle(rect)
        assert abs(got.lo - lo) <= 1e-9
        assert abs(got.hi - hi) <= 1e-9


def test_rect_norm_range_examples():
    r = rect_norm_range(Rect2(Point2(2.0, 0.0), 0.1, 0.2))
    assert abs(r.lo - 1.9) < 1e-12
    assert abs(r.hi - math.hypot(2.1, 0.2)) < 1e-12
    r = rect_norm_range(Rect2(Point2(0.0, 0.0), 0.3, 0.4))
    assert r.lo == 0.0 and abs(r.hi - 0.5) < 1e-12
    r = rect_norm_range(Rect2(Point2(5.0, 0.0), 0.0, 0.0))
    assert abs(r.lo - 5.0) < 1e-12 and abs(r.hi - 5.0) < 1e-12


def test_rect_contains_verdicts():
    sq = Rect2(Point2(0.0, 0.0), 0.5, 0.5)
    assert rect_contains(sq, Point2(0.0, 0.0)).is_in
    assert rect_contains(sq, Point2(5.0, 5.0)).is_out
    assert rect_contains(sq, Point2(0.5, 0.0), slack=1e-12).is_unknown


def test_annulus_contains_rect():
    assert annulus_contains_rect(Annulus(1.0, 3.0), Rect2(Point2(2.0, 0.0), 0.1, 0.1))
    assert not annulus_contains_rect(Annulus(1.0, 3.0), Rect2(Point2(3.5, 0.0), 0.1, 0.1))
    assert annulus_contains_rect(Annulus(0.0, 10.0), Rect2(Point2(4.0, 3.0), 1.0, 1.0))


def test_annulus_validation():
    with pytest.raises(InvalidParameter):
        Annulus(2.0, 1.0)


def test_half_open_band_edges():
    assert band_verdict_half_open(0.0, 0.0, 1.0, 1e-12).is_in
    assert band_verdict_half_open(1.0, 0.0, 1.0, 1e-12).is_out
    assert band_verdict_half_open(0.5, 0.0, 1.0, 1e-12).is_in
    assert band_verdict_half_open(1.0 - 1e-14, 0.0, 1.0, 1e-12).is_unknown
    assert band_verdict_half_open(-1e-14, 0.0, 1.0, 1e-12).is_unknown
