import math

import numpy as np
import pytest

from coneoverlap.cone import (
    ConeSlab,
    DecompositionParams,
    ENLARGED,
    RadialInterval,
    STANDARD,
    SlabParam,
    eps_neighborhood,
    eps_slab_contains,
    index_set,
    rotate_slab_index,
    sector_contains,
    slab_contains,
    slab_contains_exact,
    slab_distance,
    slab_param_point,
    slab_params_of,
)
from coneoverlap.errors import (
    IndexOutOfRange,
    InvalidEpsilon,
    InvalidParameter,
    ParamOutOfRange,
    WrongVariant,
)
from coneoverlap.geom import Point2, Point3, rotate


def test_index_set_fine():
    assert len(index_set(DecompositionParams(1e-4))) == 77


def test_index_set_coarse():
    assert index_set(DecompositionParams(1e-2)) == [-2, -1, 0, 1, 2]


def test_index_set_empty():
    assert index_set(DecompositionParams(1e-2, sector_bound=0.05)) == []


def test_params_validation():
    with pytest.raises(InvalidParameter):
        DecompositionParams(0.02)
    with pytest.raises(InvalidParameter):
        DecompositionParams(1e-3, sector_bound=4.0)
    with pytest.raises(InvalidParameter):
        RadialInterval(0.9, 1.1)
    with pytest.raises(InvalidParameter):
        RadialInterval(1.5, 1.4)
    with pytest.raises(InvalidEpsilon):
        eps_neighborhood(0.6)


def test_radial_interval_width_check():
    params = DecompositionParams(1e-4)
    with pytest.raises(InvalidParameter):
        ConeSlab(params, 0, RadialInterval(1.3, 1.4))


def test_sector_contains_examples():
    params = DecompositionParams(1e-4)
    assert sector_contains(3, rotate(Point2(1, 0), 0.035), params).is_in
    assert sector_contains(0, Point2(1.0, 0.0), params).is_in
    assert sector_contains(0, rotate(Point2(1, 0), 0.02), params).is_out


def test_slab_contains_examples():
    params = DecompositionParams(1e-4)
    j = RadialInterval(1.2, 1.21)
    slab = ConeSlab(params, 0, j)
    assert slab_contains(slab, Point3(1.205, 0.0, 1.205)).is_in
    assert slab_contains(slab, Point3(1.205, 0.0, 1.2052)).is_out
    enlarged = ConeSlab(params, 0, j, ENLARGED)
    assert slab_contains(enlarged, Point3(1.205, 0.0, 1.2055)).is_in


def test_slab_contains_rejects_eps_variant():
    params = DecompositionParams(1e-2)
    slab = ConeSlab(params, 0, RadialInterval(1.3, 1.35), eps_neighborhood(0.3))
    with pytest.raises(WrongVariant):
        slab_contains(slab, Point3(1.3, 0.0, 1.3))


def test_param_point_examples():
    params = DecompositionParams(1e-2)
    slab = ConeSlab(params, 0, RadialInterval(1.45, 1.55))
    p = slab_param_point(slab, SlabParam(0.0, 1.5, 0.0))
    assert (p.x1, p.x2, p.eta) == (1.5, 0.0, 1.5)
    p = slab_param_point(slab, SlabParam(0.0, 1.5, 1e-2))
    assert p.eta == 1.5 + 1e-2
    with pytest.raises(ParamOutOfRange):
        slab_param_point(slab, SlabParam(0.2, 1.5, 0.0))
    with pytest.raises(ParamOutOfRange):
        slab_param_point(slab, SlabParam(0.0, 1.3, 0.0))
    with pytest.raises(ParamOutOfRange):
        slab_param_point(slab, SlabParam(0.0, 1.5, 2e-2))


def _random_interior_param(rng, slab, margin=0.02):
    t0, t1 = slab.angular_range
    r0, r1 = slab.radial_range
    dv = slab.vertical_half
    u = margin + (1 - 2 * margin) * rng.random(3)
    return SlabParam(t0 + u[0] * (t1 - t0), r0 + u[1] * (r1 - r0), dv * (2 * u[2] - 1))


@pytest.mark.parametrize("variant", [STANDARD, ENLARGED])
def test_parametrization_soundness(variant):
    rng = np.random.default_rng(5)
    params = DecompositionParams(1e-3)
    j = RadialInterval.pinned(1.3, 1e-3)
    for _ in range(40):
        mu = int(rng.integers(-params.max_index, params.max_index + 1))
        slab = ConeSlab(params, mu, j, variant)
        for _ in range(250):
            q = _random_interior_param(rng, slab)
            assert slab_contains(slab, slab_param_point(slab, q)).is_in


def test_parametrization_completeness():
    rng = np.random.default_rng(6)
    params = DecompositionParams(1e-3)
    j = RadialInterval.pinned(1.3, 1e-3)
    slab = ConeSlab(params, 3, j)
    for _ in range(10_000):
        q = _random_interior_param(rng, slab)
        p = slab_param_point(slab, q)
        q2 = slab_params_of(slab, p)
        p2 = slab_param_point(slab, q2)
        assert abs(p2.x1 - p.x1) <= 1e-10
        assert abs(p2.x2 - p.x2) <= 1e-10
        assert abs(p2.eta - p.eta) <= 1e-10


def test_variant_nesting():
    rng = np.random.default_rng(7)
    params = DecompositionParams(1e-3)
    j = RadialInterval.pinned(1.3, 1e-3)
    std = ConeSlab(params, 2, j)
    big = ConeSlab(params, 2, j, ENLARGED)
    for _ in range(2000):
        p = slab_param_point(std, _random_interior_param(rng, std))
        assert slab_contains(big, p).is_in


def test_slab_contains_exact_halfopen():
    params = DecompositionParams(1e-2)
    j = RadialInterval(1.3, 1.35)
    slab = ConeSlab(params, 0, j)
    h = params.sqrt_delta
    assert slab_contains_exact(slab, Point3(1.32, 0.0, 1.32))
    on_right_edge = Point3(1.32 * math.cos(h), 1.32 * math.sin(h), 1.32)
    assert not slab_contains_exact(slab, on_right_edge)


def test_distance_interior_contains_zero():
    params = DecompositionParams(1e-2)
    slab = ConeSlab(params, 0, RadialInterval(1.45, 1.55))
    p = slab_param_point(slab, SlabParam(0.05, 1.5, 0.002))
    lo, hi = slab_distance(slab, p)
    assert lo == 0.0 and hi <= 1e-3 * params.sqrt_delta + 1e-9


def test_distance_far_point():
    params = DecompositionParams(1e-2)
    slab = ConeSlab(params, 0, RadialInterval(1.45, 1.55))
    lo, hi = slab_distance(slab, Point3(10.0, 0.0, 0.0))
    assert lo > 7.0 and hi >= lo


def _oracle_distance(slab, p, n=80):
    t0, t1 = slab.angular_range
    r0, r1 = slab.radial_range
    dv = slab.vertical_half
    ts = np.linspace(t0, t1, n)
    rs = np.linspace(r0, r1, n)
    ss = np.linspace(-dv, dv, 9)
    tg, rg, sg = np.meshgrid(ts, rs, ss, indexing="ij")
    d = np.sqrt(
        (p.x1 - rg * np.cos(tg)) ** 2
        + (p.x2 - rg * np.sin(tg)) ** 2
        + (p.eta - rg - sg) ** 2
    )
    return float(d.min())


def test_distance_angular_offset_case():
    params = DecompositionParams(1e-2)
    j = RadialInterval(1.45, 1.55)
    slab = ConeSlab(params, 0, j)
    gamma = 0.05
    r0 = 1.5
    theta = slab.angular_range[1] + gamma
    p = Point3(r0 * math.cos(theta), r0 * math.sin(theta), r0)
    lo, hi = slab_distance(slab, p)
    oracle = _oracle_distance(slab, p)
    assert lo <= oracle + 1e-9
    assert oracle <= hi + 5e-3  # grid covering slack
    expected = 2.0 * r0 * math.sin(gamma / 2.0)
    assert lo - 1e-6 <= expected <= hi + 1e-3


def test_distance_out_margin():
    params = DecompositionParams(1e-2)
    slab = ConeSlab(params, 0, RadialInterval(1.45, 1.55))
    base = slab_param_point(slab, SlabParam(0.05, 1.5, params.delta))
    m = 0.005
    p = Point3(base.x1, base.x2, base.eta + m)
    assert slab_contains(slab, p).is_out
    lo, hi = slab_distance(slab, p)
    assert lo <= m + 1e-9 and hi >= 0.0


def test_distance_rejects_non_standard():
    params = DecompositionParams(1e-2)
    slab = ConeSlab(params, 0, RadialInterval(1.45, 1.55), ENLARGED)
    with pytest.raises(WrongVariant):
        slab_distance(slab, Point3(1.5, 0.0, 1.5))


def test_eps_slab_contains():
    params = DecompositionParams(1e-2)
    j = RadialInterval(1.45, 1.55)
    eps = eps_neighborhood(0.3)
    slab = ConeSlab(params, 0, j, eps)
    std = ConeSlab(params, 0, j)
    p = slab_param_point(std, SlabParam(0.05, 1.5, 0.0))
    assert eps_slab_contains(slab, p).is_in
    threshold = params.delta ** 0.7
    far = Point3(p.x1, p.x2, p.eta + 2.0 * threshold + 2.0 * params.delta)
    assert eps_slab_contains(slab, far).is_out
    with pytest.raises(WrongVariant):
        eps_slab_contains(std, p)


def test_rotate_slab_index():
    params = DecompositionParams(1e-4)
    assert rotate_slab_index(3, -3, params) == 0
    assert rotate_slab_index(0, 5, params) == 5
    with pytest.raises(IndexOutOfRange):
        rotate_slab_index(38, 1, params)


def test_rotation_covariance():
    rng = np.random.default_rng(8)
    params = DecompositionParams(1e-3)
    j = RadialInterval.pinned(1.3, 1e-3)
    h = params.sqrt_delta
    for _ in range(300):
        mu = int(rng.integers(-5, 6))
        k = int(rng.integers(-3, 4))
        slab = ConeSlab(params, mu, j)
        shifted = ConeSlab(params, mu + k, j)
        q = _random_interior_param(rng, slab)
        p = slab_param_point(slab, q)
        xi = rotate(Point2(p.x1, p.x2), k * h)
        assert slab_contains(shifted, Point3(xi.x1, xi.x2, p.eta)).is_in


def test_enlarged_index_bound():
    params = DecompositionParams(1e-4)
    j = RadialInterval.pinned(1.3, 1e-4)
    # 40 is outside the standard pi/8 set (38) but inside the pi/7 set (43)
    with pytest.raises(IndexOutOfRange):
        ConeSlab(params, 40, j, STANDARD)
    ConeSlab(params, 40, j, ENLARGED)
    with pytest.raises(IndexOutOfRange):
        ConeSlab(params, 44, j, ENLARGED)
