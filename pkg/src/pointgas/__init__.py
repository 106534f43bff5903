"""Sampling and certified Monte Carlo estimation for repulsive Gibbs point
processes: block dynamics, partition-function counting, pressure and
surface-pressure estimators, connective-constant estimation, and exact
desk-scale oracles for validation."""

from . import activity, connective, counting, estimators, geometry, potential
from . import sampler, ssm, thermo
from .backend import BACKEND

__version__ = "0.1.0"

__all__ = [
    "activity", "connective", "counting", "estimators", "geometry",
    "potential", "sampler", "ssm", "thermo", "BACKEND", "__version__",
]
