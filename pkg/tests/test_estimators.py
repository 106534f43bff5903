import math

import numpy as np
import pytest

from pointgas import activity as act
from pointgas import counting
from pointgas import geometry as geom
from pointgas import potential as pot
from pointgas.estimators import (DensityRequest, added_energy,
                                 estimate_density, estimate_emptiness,
                                 estimate_kpoint_density, total_energy)
from pointgas.sampler import BlockDynamicsConfig, GibbsModel, PointConfiguration

IDEAL = pot.Strauss(0.5, 0.0)
INF = float("inf")


def _brute_added(phi, region, pts, v):
    return sum(pot.evaluate_radial(phi, geom.distance(region, v, p)) for p in pts)


def test_added_energy_empty():
    region = geom.Box([0], [1])
    assert added_energy(pot.HardSphere(1.0), region, np.zeros((0, 1)), [0.5]) == 0.0


def test_added_energy_hard_overlap():
    region = geom.Box([0, 0], [4, 4])
    cfg = np.array([[1.0, 1.0], [3.0, 3.0]])
    assert added_energy(pot.HardSphere(1.0), region, cfg, [1.2, 1.0]) == INF


def test_added_energy_strauss_counts_neighbors():
    rng = np.random.default_rng(2)
    region = geom.Box([0, 0], [5, 5])
    phi = pot.Strauss(1.0, 1.3)
    for _ in range(10):
        pts = rng.uniform(0, 5, size=(50, 2))
        v = rng.uniform(0, 5, size=2)
        n_close = int(np.sum(np.linalg.norm(pts - v, axis=1) < 1.0))
        got = added_energy(phi, region, pts, v)
        assert got == pytest.approx(1.3 * n_close)
        assert got == pytest.approx(_brute_added(phi, region, pts, v))


def test_added_energy_with_cell_index():
    rng = np.random.default_rng(3)
    region = geom.Torus(5.0, 2)
    phi = pot.Strauss(1.0, 0.7)
    pts = rng.uniform(0, 5, size=(60, 2))
    idx = geom.CellIndex.from_points(region, 1.0, pts)
    for _ in range(10):
        v = rng.uniform(0, 5, size=2)
        assert added_energy(phi, region, pts, v, index=idx) == pytest.approx(
            added_energy(phi, region, pts, v))


def test_total_energy_small_and_packed():
    region = geom.Box([0], [4])
    assert total_energy(pot.HardSphere(1.0), region, np.zeros((0, 1))) == 0.0
    assert total_energy(pot.HardSphere(1.0), region, np.array([[1.0]])) == 0.0
    packing = np.array([[0.0], [1.5], [3.0]])
    assert total_energy(pot.HardSphere(1.0), region, packing) == 0.0


def test_total_energy_matches_brute_force():
    rng = np.random.default_rng(4)
    region = geom.Box([0, 0], [3, 3])
    phi = pot.Strauss(1.0, 0.9)
    pts = rng.uniform(0, 3, size=(25, 2))
    brute = sum(pot.evaluate_radial(phi, float(np.linalg.norm(pts[i] - pts[j])))
                for i in range(25) for j in range(i + 1, 25))
    assert total_energy(phi, region, pts) == pytest.approx(brute)


def test_density_free_gas_exact():
    region = geom.Box([0.0], [2.0])
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 1.5))
    est = estimate_density(DensityRequest(model, [1.0], 0.05, 200), seed=1)
    assert est.value == pytest.approx(1.5)
    assert est.std_error == 0.0


def test_density_zero_activity_point():
    region = geom.Box([0.0], [2.0])
    model = GibbsModel(region, pot.HardSphere(0.5), act.uniform_on(region, 1.0))
    est = estimate_density(DensityRequest(model, [5.0], 0.05, 100), seed=1)
    assert est.value == 0.0 and est.std_error == 0.0


def test_density_bounded_by_activity():
    region = geom.Box([0.0, 0.0], [3.0, 3.0])
    model = GibbsModel(region, pot.Strauss(1.0, 2.0),
                       act.uniform_on(region, 0.8))
    est = estimate_density(DensityRequest(model, [1.5, 1.5], 0.05, 400), seed=2)
    assert 0.0 <= est.value <= 0.8
    assert est.std_error <= 0.8 / math.sqrt(400) + 1e-12


def test_density_sandwich():
    region = geom.Box([0.0], [4.0])
    lam = 1.0
    model = GibbsModel(region, pot.HardSphere(0.5), act.uniform_on(region, lam))
    est = estimate_density(DensityRequest(model, [2.0], 0.02, 2000), seed=3)
    lower = lam * math.exp(-lam * geom.ball_volume(1, 0.5))
    assert est.value + 3 * est.std_error >= lower
    assert est.value - 3 * est.std_error <= lam


def test_density_matches_rods_oracle():
    # exact density from the partition ratio: the tilt splits the interval
    region = geom.Box([0.0], [4.0])
    lam, r = 1.0, 0.5
    model = GibbsModel(region, pot.HardSphere(r), act.uniform_on(region, lam))
    exact = lam * math.exp(2 * counting.tonks_log_partition(1.5, r, lam)
                           - counting.tonks_log_partition(4.0, r, lam))
    est = estimate_density(DensityRequest(model, [2.0], 0.01, 4000), seed=4)
    assert abs(est.value - exact) <= 3 * est.std_error + 0.01


def test_density_insensitive_to_doubling_steps():
    region = geom.Box([0.0], [4.0])
    model = GibbsModel(region, pot.HardSphere(0.5), act.uniform_on(region, 1.0))
    base = BlockDynamicsConfig()
    t0 = base.steps(4.0)
    a = estimate_density(DensityRequest(model, [2.0], 0.02, 3000,
                                        BlockDynamicsConfig(T=t0)), seed=5)
    b = estimate_density(DensityRequest(model, [2.0], 0.02, 3000,
                                        BlockDynamicsConfig(T=2 * t0)), seed=6)
    z = abs(a.value - b.value) / math.hypot(a.std_error, b.std_error)
    assert z < 2.58  # two-sample z-test at the 1% level


def test_emptiness_free_gas():
    region = geom.Box([0.0, 0.0], [2.0, 2.0])
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 1.0))
    sub = geom.Box([0.0, 0.0], [1.0, 1.0])
    est = estimate_emptiness(model, sub, 3000, BlockDynamicsConfig(T=40), seed=7)
    assert abs(est.value - math.exp(-1.0)) <= 3 * est.std_error + 0.01
    assert 0.0 <= est.value <= 1.0


def test_emptiness_poisson_domination_lower_bound():
    region = geom.Box([0.0], [3.0])
    lam = 1.0
    model = GibbsModel(region, pot.HardSphere(0.5), act.uniform_on(region, lam))
    sub = geom.Box([1.0], [ 2.0])
    est = estimate_emptiness(model, sub, 2000, BlockDynamicsConfig(), seed=8)
    assert est.value + 3 * est.std_error >= math.exp(-lam * 1.0)


def test_emptiness_matches_rods_oracle():
    region = geom.Box([0.0], [4.0])
    lam, r = 1.0, 0.5
    model = GibbsModel(region, pot.HardSphere(r), act.uniform_on(region, lam))
    sub = geom.Box([1.5], [2.5])
    # activity zeroed on [1.5, 2.5]: two independent length-1.5 intervals
    exact = math.exp(2 * counting.tonks_log_partition(1.5, r, lam)
                     - counting.tonks_log_partition(4.0, r, lam))
    est = estimate_emptiness(model, sub, 4000, BlockDynamicsConfig(), seed=9)
    assert abs(est.value - exact) <= 3 * est.std_error + 0.01


def test_kpoint_single_equals_density():
    region = geom.Box([0.0], [3.0])
    model = GibbsModel(region, pot.HardSphere(0.5), act.uniform_on(region, 1.0))
    cfg = BlockDynamicsConfig()
    a = estimate_kpoint_density(model, [[1.5]], 0.05, 500, cfg, seed=10)
    b = estimate_density(DensityRequest(model, [1.5], 0.05, 500, cfg), seed=10,
                         purpose="kpoint.0")
    assert a.value == pytest.approx(b.value)


def test_kpoint_hard_overlap_is_zero():
    region = geom.Box([0.0, 0.0], [3.0, 3.0])
    model = GibbsModel(region, pot.HardSphere(1.0), act.uniform_on(region, 1.0))
    est = estimate_kpoint_density(model, [[1.0, 1.0], [1.5, 1.0]], 0.05, 100,
                                  BlockDynamicsConfig(), seed=11)
    assert est.value == 0.0 and est.std_error == 0.0


def test_kpoint_free_gas_power():
    region = geom.Box([0.0], [2.0])
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 1.3))
    est = estimate_kpoint_density(model, [[0.5], [1.0], [1.5]], 0.05, 200,
                                  BlockDynamicsConfig(T=20), seed=12)
    assert est.value == pytest.approx(1.3 ** 3)
    assert est.std_error == 0.0
