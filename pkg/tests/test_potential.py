import math

import numpy as np
import pytest

from pointgas import potential as pot


def test_hard_sphere_inside_is_infinite():
    phi = pot.HardSphere(1.0)
    assert pot.evaluate(phi, [0.5, 0.0]) == math.inf
    assert pot.boltzmann(phi, [0.5, 0.0]) == 0.0


def test_strauss_inside_value():
    phi = pot.Strauss(1.0, 2.0)
    assert pot.evaluate(phi, [0.5]) == 2.0


@pytest.mark.parametrize("phi", [pot.HardSphere(1.0), pot.Strauss(1.0, 3.0),
                                 pot.Tabulated([0.5, 1.0], [math.inf, 1.5])])
def test_zero_beyond_range(phi):
    assert pot.evaluate(phi, [1.5, 0.0]) == 0.0
    assert pot.boltzmann(phi, [1.5, 0.0]) == 1.0


def test_strauss_log2_boltzmann():
    phi = pot.Strauss(1.0, math.log(2.0))
    assert pot.boltzmann(phi, [0.3]) == pytest.approx(0.5)


def test_boltzmann_range_and_symmetry():
    rng = np.random.default_rng(5)
    phi = pot.Strauss(1.0, 1.7)
    for _ in range(50):
        x = rng.normal(size=2)
        b = pot.boltzmann(phi, x)
        assert 0.0 <= b <= 1.0
        theta = rng.uniform(0, 2 * math.pi)
        rot = np.array([[math.cos(theta), -math.sin(theta)],
                        [math.sin(theta), math.cos(theta)]])
        assert pot.evaluate(phi, rot @ x) == pytest.approx(pot.evaluate(phi, x))


def test_temperedness_hard_sphere_is_ball_volume():
    c = pot.temperedness(pot.HardSphere(1.0), 2)
    assert c.c_phi == pytest.approx(math.pi)
    assert c.error == 0.0


def test_temperedness_strauss_limit():
    c = pot.temperedness(pot.Strauss(1.0, 50.0), 2)
    assert c.c_phi == pytest.approx(math.pi, rel=1e-10)


def test_temperedness_strauss_1d_analytic():
    c = pot.temperedness(pot.Strauss(1.0, 1.0), 1)
    assert c.c_phi == pytest.approx(2.0 * (1.0 - math.exp(-1.0)))


def test_temperedness_tabulated_exact_shells():
    # steps at phi=inf on [0, .5) and phi=1 on [.5, 1)
    phi = pot.Tabulated([0.5, 1.0], [math.inf, 1.0])
    c = pot.temperedness(phi, 2)
    expect = math.pi * 0.25 + (1 - math.exp(-1)) * math.pi * (1 - 0.25)
    assert c.c_phi == pytest.approx(expect)
    assert c.error < 1e-8


def test_temperedness_bounded_by_range_ball():
    from pointgas.geometry import ball_volume
    for phi in (pot.Strauss(0.7, 0.3), pot.Tabulated([0.3, 0.7], [2.0, 0.1])):
        c = pot.temperedness(phi, 2)
        assert 0.0 <= c.c_phi <= ball_volume(2, 0.7) + 1e-12


def test_tabulated_right_continuous():
    phi = pot.Tabulated([0.5, 1.0], [3.0, 1.0])
    assert pot.evaluate_radial(phi, 0.0) == 3.0
    assert pot.evaluate_radial(phi, 0.5) == 1.0
    assert pot.evaluate_radial(phi, 1.0) == 0.0


def test_tabulated_validation():
    with pytest.raises(ValueError):
        pot.Tabulated([1.0, 0.5], [1.0, 1.0])
    with pytest.raises(ValueError):
        pot.Tabulated([0.5], [-1.0])


def test_load_tabulated(tmp_path):
    path = tmp_path / "phi.txt"
    path.write_text("# comment\n0.5 inf\n1.0 1.5\n")
    phi = pot.load_tabulated(path)
    assert phi.radii == (0.5, 1.0)
    assert phi.values[0] == math.inf
    assert pot.hard_core_radius(phi) == 0.5


def test_hard_core_radius():
    assert pot.hard_core_radius(pot.HardSphere(0.7)) == 0.7
    assert pot.hard_core_radius(pot.Strauss(1.0, 5.0)) == 0.0
    assert pot.hard_core_radius(pot.Tabulated([0.3, 0.6], [1.0, math.inf])) == 0.0
