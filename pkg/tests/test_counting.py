import math

import numpy as np
import pytest

from pointgas import activity as act
from pointgas import counting
from pointgas import geometry as geom
from pointgas import potential as pot
from pointgas.counting import (OracleToleranceError, approx_log_partition,
                               logz_sweep, series_log_partition_oracle,
                               tonks_log_partition, tonks_ring_log_partition,
                               unit_partition)
from pointgas.sampler import BlockDynamicsConfig, GibbsModel

IDEAL = pot.Strauss(0.5, 0.0)


def test_tonks_ideal_gas_limit():
    assert tonks_log_partition(3.0, 1e-9, 1.0) == pytest.approx(3.0, rel=1e-6)


def test_tonks_single_rod_regime():
    # at most one rod fits: Z = 1 + lam * length
    assert tonks_log_partition(0.4, 0.5, 2.0) == pytest.approx(math.log(1 + 0.8))


def test_tonks_matches_series_oracle():
    region = geom.Box([0.0], [2.0])
    model = GibbsModel(region, pot.HardSphere(0.5), act.uniform_on(region, 1.0))
    series = series_log_partition_oracle(model, 1e-4)
    assert abs(series - tonks_log_partition(2.0, 0.5, 1.0)) < 1e-3


def test_ring_ideal_gas_limit():
    assert tonks_ring_log_partition(5.0, 1e-9, 1.0) == pytest.approx(5.0, rel=1e-6)


def test_ring_single_rod_regime():
    # two rods cannot fit on a circumference below twice the diameter
    assert tonks_ring_log_partition(0.9, 0.5, 1.0) == pytest.approx(math.log(1.9))


def test_ring_matches_pressure_at_size_eight():
    from pointgas.thermo import tonks_pressure_oracle

    p = tonks_pressure_oracle(1.0, 0.5)
    assert abs(tonks_ring_log_partition(8.0, 0.5, 1.0) - 8.0 * p) < 1e-3


def test_series_oracle_zero_activity():
    region = geom.Box([0.0], [1.0])
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 0.0))
    assert series_log_partition_oracle(model, 1e-6) == 0.0


def test_series_oracle_free_gas():
    region = geom.Box([0.0], [1.0])
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 0.5))
    assert series_log_partition_oracle(model, 1e-5) == pytest.approx(0.5, abs=1e-4)


def test_series_oracle_tolerance_unreachable():
    region = geom.Box([0.0], [40.0])
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 1.0))
    with pytest.raises(OracleToleranceError):
        series_log_partition_oracle(model, 1e-6)


def test_unit_partition_box():
    part = unit_partition(geom.Box([0.0, 0.0], [2.0, 2.0]))
    assert len(part) == 4
    los = sorted(b[0] for b in part.boxes)
    assert los == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
    total = sum(float(np.prod(np.asarray(b[1]) - np.asarray(b[0])))
                for b in part.boxes)
    assert total == pytest.approx(4.0)


def test_unit_partition_remainder_slab():
    part = unit_partition(geom.Box([0.0], [2.5]))
    assert [b for b in part.boxes] == [((0.0,), (1.0,)), ((1.0,), (2.0,)),
                                       ((2.0,), (2.5,))]


def test_approx_logz_zero_activity():
    region = geom.Box([0.0, 0.0], [2.0, 2.0])
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 0.0))
    est = approx_log_partition(model, 0.1, seed=1)
    assert est.value == 0.0 and est.std_error == 0.0


def test_approx_logz_free_gas_square():
    region = geom.Box([0.0, 0.0], [2.0, 2.0])
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 1.0))
    est = approx_log_partition(model, 0.2, seed=2)
    assert abs(est.value - 4.0) <= 0.2


def test_approx_logz_factors_lower_bound():
    # every emptiness factor of a unit box is at least e^{-lam}
    region = geom.Box([0.0], [3.0])
    model = GibbsModel(region, pot.HardSphere(0.5), act.uniform_on(region, 1.0))
    factors = []
    approx_log_partition(model, 0.25, seed=3, factors_out=factors)
    assert len(factors) == 3
    for f in factors:
        assert f.value + 3 * f.std_error >= math.exp(-1.0)


def test_approx_logz_monotone_in_activity():
    region = geom.Box([0.0], [2.0])
    vals = []
    for lam in (0.4, 0.8, 1.2):
        model = GibbsModel(region, pot.HardSphere(0.5),
                           act.uniform_on(region, lam))
        vals.append(approx_log_partition(model, 0.25, seed=4).value)
    assert vals[0] < vals[1] < vals[2]


def test_sweep_free_gas_exact():
    region = geom.Box([0.0], [2.0])
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 1.0))
    est = logz_sweep(model, seed=5, mesh_h=0.25, n_samples=50,
                     chain_cfg=BlockDynamicsConfig(T=10))
    assert est.value == pytest.approx(2.0)
    assert est.std_error == 0.0


def test_sweep_matches_rods_oracle():
    region = geom.Box([0.0], [4.0])
    model = GibbsModel(region, pot.HardSphere(0.5), act.uniform_on(region, 1.0))
    est = logz_sweep(model, seed=6, mesh_h=0.25, n_samples=600)
    exact = tonks_log_partition(4.0, 0.5, 1.0)
    assert abs(est.value - exact) <= max(3 * est.std_error, 0.05)


def test_sweep_requires_box():
    region = geom.Torus(4.0, 1)
    model = GibbsModel(region, IDEAL, act.uniform_on(region, 1.0))
    with pytest.raises(ValueError):
        logz_sweep(model, seed=7)


def test_approx_logz_torus():
    region = geom.Torus(4.0, 1)
    model = GibbsModel(region, pot.HardSphere(0.5), act.uniform_on(region, 1.0))
    est = approx_log_partition(model, 0.2, seed=8)
    exact = tonks_ring_log_partition(4.0, 0.5, 1.0)
    assert abs(est.value - exact) <= 0.2
