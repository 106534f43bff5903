import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointgas import geometry as geom


def test_euclidean_displacement():
    box = geom.Box([-5, -5], [5, 5])
    d = geom.displacement(box, [0, 0], [3, 4])
    assert np.allclose(d, [3, 4])
    assert geom.distance(box, [0, 0], [3, 4]) == pytest.approx(5.0)


def test_torus_minimum_image():
    t = geom.Torus(10.0, 1)
    d = geom.displacement(t, [1.0], [9.0])
    assert np.allclose(d, [-2.0])
    assert geom.distance(t, [1.0], [9.0]) == pytest.approx(2.0)


def test_zero_displacement():
    for region in (geom.Box([0], [1]), geom.Torus(3.0, 1)):
        assert np.allclose(geom.displacement(region, [0.5], [0.5]), [0.0])


def test_displacement_dimension_mismatch():
    with pytest.raises(ValueError):
        geom.displacement(geom.Box([0, 0], [1, 1]), [0.5], [0.5, 0.5])


def test_box_volume():
    assert geom.volume(geom.Box([-2, -2, -2], [2, 2, 2])) == pytest.approx(64.0)


def test_torus_volume():
    assert geom.volume(geom.Torus(5.0, 2)) == pytest.approx(25.0)


def test_ball_volume_closed_form():
    assert geom.volume(geom.Ball([0, 0], 1.0)) == pytest.approx(math.pi)
    assert geom.ball_volume(3, 1.0) == pytest.approx(4.0 * math.pi / 3.0)
    assert geom.ball_volume(1, 2.0) == pytest.approx(4.0)


def test_halfspace_volume_rejected():
    with pytest.raises(geom.UnboundedRegionError):
        geom.volume(geom.HalfSpace([1.0], 0.0))


def test_box_volume_is_product_of_sides():
    rng = np.random.default_rng(0)
    for _ in range(20):
        lo = rng.uniform(-5, 0, size=3)
        hi = lo + rng.uniform(0.1, 4, size=3)
        assert geom.volume(geom.Box(lo, hi)) == pytest.approx(float(np.prod(hi - lo)))


def test_torus_displacement_symmetry_and_bound():
    t = geom.Torus(7.0, 2)
    rng = np.random.default_rng(3)
    half_diag = math.sqrt(2) * 3.5
    for _ in range(50):
        p, q = rng.uniform(0, 7, size=(2, 2))
        assert geom.distance(t, p, q) == pytest.approx(geom.distance(t, q, p))
        assert geom.distance(t, p, q) <= half_diag + 1e-12


def test_canonicalize_wraps():
    t = geom.Torus(4.0, 2)
    assert np.allclose(geom.canonicalize(t, [5.0, -1.0]), [1.0, 3.0])


def _brute_force(region, points, center, radius):
    return sorted(i for i, p in enumerate(points)
                  if geom.distance(region, center, p) <= radius)


@pytest.mark.parametrize("region", [geom.Box([0, 0], [6, 6]), geom.Torus(6.0, 2)])
def test_cell_index_matches_brute_force(region):
    rng = np.random.default_rng(11)
    points = rng.uniform(0, 6, size=(200, 2))
    idx = geom.CellIndex.from_points(region, cell_size=1.0, points=points)
    for _ in range(50):
        center = rng.uniform(0, 6, size=2)
        radius = rng.uniform(0, 1.0)
        assert idx.query(center, radius) == _brute_force(region, points, center, radius)


def test_cell_index_small_torus_no_duplicates():
    region = geom.Torus(2.0, 1)
    idx = geom.CellIndex.from_points(region, cell_size=1.0, points=[[0.1], [1.1]])
    assert idx.query([0.0], 1.0) == [0, 1]


def test_cell_index_empty_and_single():
    region = geom.Box([0], [4])
    idx = geom.CellIndex(region, 1.0)
    assert idx.query([2.0], 0.5) == []
    pid = idx.insert([2.25])
    assert idx.query([2.0], 0.5) == [pid]
    idx.remove(pid)
    assert idx.query([2.0], 0.5) == []


def test_cell_index_radius_guard():
    idx = geom.CellIndex(geom.Box([0], [4]), 1.0)
    with pytest.raises(ValueError):
        idx.query([2.0], 1.5)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0, 5.99), min_size=1, max_size=40),
       st.floats(0.05, 1.0), st.floats(0, 5.99))
def test_cell_index_property_1d(points, radius, center):
    region = geom.Box([0.0], [6.0])
    pts = [[x] for x in points]
    idx = geom.CellIndex.from_points(region, 1.0, pts)
    assert idx.query([center], radius) == _brute_force(region, pts, [center], radius)
