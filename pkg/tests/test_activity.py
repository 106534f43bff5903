import math

import numpy as np
import pytest

from pointgas import activity as act
from pointgas import geometry as geom
from pointgas import potential as pot

INF = float("inf")


def test_constant_indicator():
    fn = act.uniform_on(geom.Box([0, 0], [1, 1]), 1.0)
    assert fn.value([0.5, 0.5]) == 1.0
    assert fn.value([2.0, 2.0]) == 0.0


def test_half_space_mask():
    fn = act.half_space(2, [1.0, 0.0], 2.0)
    assert fn.value([-0.1, 5.0]) == 0.0
    assert fn.value([0.1, 5.0]) == 2.0


def test_recursion_tilt_zeroes_near_anchor():
    phi = pot.HardSphere(1.0)
    fn = act.uniform_on(geom.Box([-5, -5], [5, 5]), 1.0)
    v = np.array([0.0, 0.0])
    w = np.array([0.5, 0.0])
    tilted = act.recursion_tilt(fn, v, w, phi)
    # inside min(|v-w|, r): the hard-core factor kills the value
    assert tilted.value([0.25, 0.0]) == 0.0
    # between |v-w| and r: the tilt no longer applies
    assert tilted.value([0.75, 0.0]) == 1.0


def test_recursion_tilt_zero_distance_reduces_to_plain_tilt():
    phi = pot.Strauss(1.0, 1.3)
    fn = act.uniform_on(geom.Box([-5], [5]), 1.0)
    v = np.array([0.0])
    tilted = act.recursion_tilt(fn, v, v, phi)
    plain = act.tilt_by_points(fn, v[None, :], phi)
    xs = np.linspace(-2, 2, 41)[:, None]
    # cutoff 0 means the factor never applies; the paper-facing reduction is
    # with w at distance >= r, where the recursion tilt equals a plain tilt
    far = act.recursion_tilt(fn, v, np.array([1.0]), phi)
    assert np.allclose(far.values(xs), plain.values(xs))
    assert np.allclose(tilted.values(xs), fn.values(xs))


def test_tilt_empty_is_identity():
    fn = act.uniform_on(geom.Box([0], [1]), 1.5)
    assert act.tilt_by_points(fn, np.zeros((0, 1)), pot.HardSphere(1.0)) is fn


def test_tilt_hard_core_zeroes_ball():
    phi = pot.HardSphere(1.0)
    fn = act.uniform_on(geom.Box([-3], [3]), 1.0)
    tilted = act.tilt_by_points(fn, [[0.0]], phi)
    assert tilted.value([0.5]) == 0.0
    assert tilted.value([1.5]) == 1.0


def test_tilt_strauss_product_matches_brute_force():
    rng = np.random.default_rng(7)
    phi = pot.Strauss(1.0, 0.8)
    fn = act.uniform_on(geom.Box([-3, -3], [3, 3]), 2.0)
    pts = rng.uniform(-2, 2, size=(5, 2))
    tilted = act.tilt_by_points(fn, pts, phi)
    for x in rng.uniform(-3, 3, size=(100, 2)):
        n_close = int(np.sum(np.linalg.norm(pts - x, axis=1) < 1.0))
        expect = fn.value(x) * math.exp(-0.8 * n_close)
        assert tilted.value(x) == pytest.approx(expect)


def test_tilt_monotone_and_associative():
    rng = np.random.default_rng(9)
    phi = pot.Strauss(1.0, 0.5)
    fn = act.uniform_on(geom.Box([-2, -2], [2, 2]), 1.0)
    a = rng.uniform(-2, 2, size=(3, 2))
    b = rng.uniform(-2, 2, size=(2, 2))
    both = act.tilt_by_points(act.tilt_by_points(fn, a, phi), b, phi)
    joint = act.tilt_by_points(fn, np.vstack([a, b]), phi)
    xs = rng.uniform(-2, 2, size=(50, 2))
    assert np.allclose(both.values(xs), joint.values(xs))
    assert np.all(both.values(xs) <= fn.values(xs) + 1e-15)


def test_bound_respected_at_random_points():
    rng = np.random.default_rng(21)
    phi = pot.Strauss(0.8, 1.0)
    fn = act.half_space(2, [0.0, 1.0], 1.7).scaled(0.6)
    fn = act.tilt_by_points(fn, rng.uniform(-1, 1, size=(4, 2)), phi)
    xs = rng.uniform(-3, 3, size=(10_000, 2))
    vals = fn.values(xs)
    assert np.all(vals <= fn.bound + 1e-12)
    assert np.all(vals >= 0.0)


def test_construct_validation():
    with pytest.raises(ValueError):
        act.half_space(2, [1.0, 1.0], 1.0)  # not a unit vector
    with pytest.raises(ValueError):
        act.ActivityFunction(1, -1.0)
    with pytest.raises(ValueError):
        act.uniform_on(geom.Box([0], [1]), 1.0).scaled(1.5)


def test_support_separation_identical():
    fn = act.uniform_on(geom.Box([0], [1]), 1.0)
    assert act.support_separation(fn, fn, geom.Box([0], [1])) == INF


def test_support_separation_tilt():
    phi = pot.HardSphere(0.5)
    a = act.uniform_on(geom.Box([0], [1]), 1.0)
    b = act.tilt_by_points(a, [[3.0]], phi)
    assert act.support_separation(a, b, geom.Box([0], [1])) == pytest.approx(1.5)


def test_support_separation_masked_interval():
    a = act.uniform_on(geom.Box([0], [10]), 1.0)
    b = a.masked(act.Mask(act.BOX_OUT, (5.0,), (6.0,)))
    assert act.support_separation(a, b, geom.Box([0], [1])) == pytest.approx(4.0)


def test_support_separation_conservative_on_scale_change():
    a = act.uniform_on(geom.Box([0], [1]), 1.0)
    assert act.support_separation(a, a.scaled(0.5), geom.Box([0], [1])) == 0.0


def test_quadrant_and_slab():
    q = act.quadrant(2, [1.0, 0.0], [0.0, 1.0], 1.0)
    assert q.value([1.0, 1.0]) == 1.0
    assert q.value([-1.0, 1.0]) == 0.0
    assert q.value([1.0, -1.0]) == 0.0
    s = act.slab(1, [1.0], 2.0, 0.0, 1.0)
    assert s.value([0.5]) == 2.0
    assert s.value([1.5]) == 0.0


def test_support_bbox():
    fn = act.uniform_on(geom.Box([0, 0], [2, 3]), 1.0)
    lo, hi = fn.support_bbox()
    assert np.allclose(lo, [0, 0]) and np.allclose(hi, [2, 3])
    assert act.half_space(2, [1.0, 0.0], 1.0).support_bbox() is None
