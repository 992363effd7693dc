import math

import numpy as np
import pytest

from coneoverlap.cone import (
    ConeSlab,
    DecompositionParams,
    ENLARGED,
    RadialInterval,
    SlabParam,
    eps_neighborhood,
    slab_param_point,
)
from coneoverlap.errors import InvalidSample, WrongVariant
from coneoverlap.geom import Point2, Point3, rotate
from coneoverlap.minkowski import (
    SearchBudget,
    SumSpec,
    eps_sum_contains,
    quick_reject,
    sum_contains_bruteforce,
    sum_contains_certified,
)


def _params_j(delta=1e-2, left=1.3):
    params = DecompositionParams(delta)
    return params, RadialInterval.pinned(left, delta)


def _witness(rng, slab_a, slab_b, margin=0.05):
    pts = []
    for slab in (slab_a, slab_b):
        t0, t1 = slab.angular_range
        r0, r1 = slab.radial_range
        dv = slab.vertical_half
        u = margin + (1 - 2 * margin) * rng.random(3)
        q = SlabParam(t0 + u[0] * (t1 - t0), r0 + u[1] * (r1 - r0), dv * (2 * u[2] - 1))
        pts.append(slab_param_point(slab, q))
    return Point3(pts[0].x1 + pts[1].x1, pts[0].x2 + pts[1].x2, pts[0].eta + pts[1].eta)


def test_constructive_witness_in():
    rng = np.random.default_rng(0)
    params, j = _params_j()
    spec = SumSpec(ConeSlab(params, 1, j), ConeSlab(params, -1, j))
    for _ in range(25):
        p = _witness(rng, spec.slab_a, spec.slab_b)
        assert sum_contains_certified(spec, p).is_in


def test_far_point_out():
    params, j = _params_j()
    spec = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 0, j))
    assert sum_contains_certified(spec, Point3(10.0, 0.0, 0.1)).is_out


def test_doubled_on_cone_point_in():
    params, j = _params_j()
    spec = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 0, j))
    theta = 0.05
    r = 1.35
    p = Point3(2 * r * math.cos(theta), 2 * r * math.sin(theta), 2 * r)
    assert sum_contains_certified(spec, p).is_in


def test_quick_reject_examples():
    params, j = _params_j()
    spec = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 0, j))
    assert quick_reject(spec, Point3(10.0, 0.0, 0.1))
    r = 1.35
    p = Point3(2 * r * math.cos(0.05), 2 * r * math.sin(0.05), 2 * r)
    assert not quick_reject(spec, p)
    rng = np.random.default_rng(1)
    assert not quick_reject(spec, _witness(rng, spec.slab_a, spec.slab_b))


def test_quick_reject_never_rejects_members():
    rng = np.random.default_rng(2)
    params, j = _params_j(1e-3)
    m = params.max_index
    for _ in range(300):
        mu = int(rng.integers(-m, m + 1))
        nu = int(rng.integers(-m, m + 1))
        spec = SumSpec(ConeSlab(params, mu, j), ConeSlab(params, nu, j))
        assert not quick_reject(spec, _witness(rng, spec.slab_a, spec.slab_b))


def test_bruteforce_confirms_certified_in():
    rng = np.random.default_rng(3)
    params, j = _params_j()
    spec = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 1, j))
    for _ in range(10):
        p = _witness(rng, spec.slab_a, spec.slab_b)
        assert sum_contains_certified(spec, p).is_in
        assert sum_contains_bruteforce(spec, p, 12)


def test_bruteforce_strict_never_contradicts_out():
    rng = np.random.default_rng(4)
    params, j = _params_j()
    spec = SumSpec(ConeSlab(params, 2, j), ConeSlab(params, -2, j))
    other = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 0, j))
    hits = 0
    for _ in range(40):
        p = _witness(rng, other.slab_a, other.slab_b)
        if sum_contains_certified(spec, p).is_out:
            hits += 1
            assert not sum_contains_bruteforce(spec, p, 24, widen=0.0)
    assert hits > 0


def test_bruteforce_grid_validation():
    params, j = _params_j()
    spec = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 0, j))
    with pytest.raises(InvalidSample):
        sum_contains_bruteforce(spec, Point3(2.6, 0.0, 2.6), 1)


def test_symmetry_of_sum():
    rng = np.random.default_rng(5)
    params, j = _params_j(2.5e-3)
    j2 = RadialInterval.pinned(1.5, 2.5e-3)
    ab = SumSpec(ConeSlab(params, 3, j), ConeSlab(params, -2, j2))
    ba = SumSpec(ConeSlab(params, -2, j2), ConeSlab(params, 3, j))
    for _ in range(40):
        p = _witness(rng, ab.slab_a, ab.slab_b)
        jitter = rng.normal(size=3) * params.delta
        q = Point3(p.x1 + jitter[0], p.x2 + jitter[1], p.eta + jitter[2])
        va = sum_contains_certified(ab, q)
        vb = sum_contains_certified(ba, q)
        if not (va.is_unknown or vb.is_unknown):
            assert va == vb


def test_translation_out_beyond_vertical_extent():
    rng = np.random.default_rng(6)
    params, j = _params_j()
    spec = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 1, j))
    dv = spec.slab_a.vertical_half + spec.slab_b.vertical_half
    top = spec.slab_a.radial_range[1] + spec.slab_b.radial_range[1] + dv
    for _ in range(10):
        p = _witness(rng, spec.slab_a, spec.slab_b)
        t = (top - p.eta) + 2.0 * dv + 1e-6
        assert sum_contains_certified(spec, Point3(p.x1, p.x2, p.eta + t)).is_out


def test_rotation_covariance_of_membership():
    rng = np.random.default_rng(7)
    params, j = _params_j(1e-3)
    h = params.sqrt_delta
    for _ in range(50):
        mu, nu, k = (int(rng.integers(-5, 6)) for _ in range(3))
        spec = SumSpec(ConeSlab(params, mu, j), ConeSlab(params, nu, j))
        shifted = SumSpec(ConeSlab(params, mu + k, j), ConeSlab(params, nu + k, j))
        p = _witness(rng, spec.slab_a, spec.slab_b)
        assert sum_contains_certified(spec, p).is_in
        xi = rotate(Point2(p.x1, p.x2), k * h)
        assert sum_contains_certified(shifted, Point3(xi.x1, xi.x2, p.eta)).is_in


def test_eps_sum_nesting_and_threshold():
    rng = np.random.default_rng(8)
    params, j = _params_j()
    ev = eps_neighborhood(0.3)
    std = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 1, j))
    eps = SumSpec(ConeSlab(params, 0, j, ev), ConeSlab(params, 1, j, ev))
    radius = 2.0 * params.delta ** 0.7
    for _ in range(10):
        p = _witness(rng, std.slab_a, std.slab_b)
        assert eps_sum_contains(eps, p).is_in
        shifted = Point3(p.x1, p.x2, p.eta + 0.5 * radius)
        assert not eps_sum_contains(eps, shifted).is_out
        far = Point3(p.x1, p.x2, p.eta + 3.0 * radius + 6.0 * params.delta)
        assert eps_sum_contains(eps, far).is_out


def test_variant_mixing_rejected():
    params, j = _params_j()
    ev = eps_neighborhood(0.3)
    with pytest.raises(WrongVariant):
        SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 0, j, ev))
    with pytest.raises(WrongVariant):
        SumSpec(
            ConeSlab(params, 0, j, eps_neighborhood(0.2)),
            ConeSlab(params, 0, j, eps_neighborhood(0.3)),
        )
    eps = SumSpec(ConeSlab(params, 0, j, ev), ConeSlab(params, 0, j, ev))
    with pytest.raises(WrongVariant):
        sum_contains_certified(eps, Point3(2.6, 0.0, 2.6))
    std = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 0, j))
    with pytest.raises(WrongVariant):
        eps_sum_contains(std, Point3(2.6, 0.0, 2.6))


def test_budget_validation():
    with pytest.raises(InvalidSample):
        SearchBudget(max_boxes=0)


def test_tiny_budget_returns_budget_unknown():
    params, j = _params_j()
    spec = SumSpec(ConeSlab(params, 0, j), ConeSlab(params, 0, j))
    # near-boundary probe with a one-box budget
    r = 1.35
    p = Point3(2 * r, 0.0, 2 * r + 2.0 * params.delta)
    v = sum_contains_certified(spec, p, budget=SearchBudget(max_boxes=1))
    assert v.is_unknown and v.budget_exhausted


def test_soundness_pairing_sampled():
    # no certified-Out with a strict brute-force witness, and every
    # certified-In confirmed by a covering-radius witness
    rng = np.random.default_rng(9)
    params, j = _params_j(1e-2)
    m = params.max_index
    checked = 0
    for _ in range(150):
        mu0, nu0 = int(rng.integers(-m, m + 1)), int(rng.integers(-m, m + 1))
        gen = SumSpec(ConeSlab(params, mu0, j), ConeSlab(params, nu0, j))
        p = _witness(rng, gen.slab_a, gen.slab_b)
        jitter = rng.normal(size=3)
        jitter *= 2.0 * params.delta * rng.random() / np.linalg.norm(jitter)
        q = Point3(p.x1 + jitter[0], p.x2 + jitter[1], p.eta + jitter[2])
        for _ in range(2):
            mu = int(np.clip(mu0 + rng.integers(-1, 2), -m, m))
            nu = int(np.clip(nu0 + rng.integers(-1, 2), -m, m))
            spec = SumSpec(ConeSlab(params, mu, j), ConeSlab(params, nu, j))
            v = sum_contains_certified(spec, q)
            if v.is_in:
                assert sum_contains_bruteforce(spec, q, 16)
                checked += 1
            elif v.is_out:
                assert not sum_contains_bruteforce(spec, q, 20, widen=0.0)
                checked += 1
    assert checked > 100
