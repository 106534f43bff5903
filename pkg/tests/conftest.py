import numpy as np
import pytest

from pointgas import geometry as geom
from pointgas import potential as pot


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def rods():
    return pot.HardSphere(0.5)


@pytest.fixture
def interval():
    return geom.Box([0.0], [4.0])
