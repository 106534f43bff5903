"""Finite-range repulsive pair potentials and their derived constants.

All built-in kinds are radial.  +inf is a first-class value: it encodes a
hard core, and e^{-inf} is exactly 0 so hard overlaps get zero Boltzmann
weight instead of an underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ball_volume

INF = float("inf")


@dataclass(frozen=True)
class HardSphere:
    """phi = +inf inside distance r, 0 beyond."""

    r: float

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("range must be positive")


@dataclass(frozen=True)
class Strauss:
    """phi = A inside distance r, 0 beyond.  A = 0 gives the ideal gas."""

    r: float
    A: float

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("range must be positive")
        if self.A < 0:
            raise ValueError("strength must be nonnegative (repulsive)")


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-constant radial potential, right-continuous in radius.

    phi(s) = values[i] on [radii[i-1], radii[i]) with radii[-1] = range;
    phi = 0 at and beyond the range.  Values may be +inf.
    """

    radii: tuple
    values: tuple

    def __init__(self, radii, values):
        radii = tuple(float(x) for x in radii)
        values = tuple(float(x) for x in values)
        if len(radii) != len(values) or not radii:
            raise ValueError("radii and values must be equal-length and nonempty")
        if any(b <= a for a, b in zip((0.0,) + radii, radii)):
            raise ValueError("radii must be strictly increasing and positive")
        if any(v < 0 for v in values):
            raise ValueError("values must be nonnegative (repulsive)")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    @property
    def r(self):
        return self.radii[-1]


PairPotential = HardSphere | Strauss | Tabulated


@dataclass(frozen=True)
class PotentialConstants:
    """Temperedness constant with its integration error (0 for closed forms)."""

    c_phi: float
    error: float
    n_pieces: int


def range_of(potential: PairPotential) -> float:
    return potential.r


def hard_core_radius(potential: PairPotential) -> float:
    """Largest radius below which phi is +inf (0 if there is no hard core)."""
    if isinstance(potential, HardSphere):
        return potential.r
    if isinstance(potential, Tabulated):
        # only a contiguous +inf prefix acts as a hard core
        rc = 0.0
        prev = 0.0
        for hi, v in zip(potential.radii, potential.values):
            if math.isinf(v) and prev == rc:
                rc = hi
            prev = hi
        return rc
    return 0.0


def evaluate_radial(potential: PairPotential, s: float) -> float:
    """Potential value at pair distance s >= 0."""
    if isinstance(potential, HardSphere):
        return INF if s < potential.r else 0.0
    if isinstance(potential, Strauss):
        return potential.A if s < potential.r else 0.0
    if s >= potential.radii[-1]:
        return 0.0
    for hi, v in zip(potential.radii, potential.values):
        if s < hi:
            return v
    return 0.0


def evaluate(potential: PairPotential, displacement) -> float:
    """Potential value for a displacement vector."""
    return evaluate_radial(potential, float(np.linalg.norm(displacement)))


def boltzmann(potential: PairPotential, displacement) -> float:
    """e^{-phi(displacement)}, exactly 0 on a hard core."""
    v = evaluate(potential, displacement)
    return 0.0 if math.isinf(v) else math.exp(-v)


def temperedness(potential: PairPotential, dim: int) -> PotentialConstants:
    """C_phi = integral of 1 - e^{-phi} over R^dim.

    Every supported kind is piecewise constant in radius, so the integral is
    an exact sum of shell volumes weighted by 1 - e^{-value}.
    """
    if isinstance(potential, HardSphere):
        return PotentialConstants(ball_volume(dim, potential.r), 0.0, 1)
    if isinstance(potential, Strauss):
        w = -math.expm1(-potential.A)
        return PotentialConstants(w * ball_volume(dim, potential.r), 0.0, 1)
    total = 0.0
    prev = 0.0
    for hi, v in zip(potential.radii, potential.values):
        w = 1.0 if math.isinf(v) else -math.expm1(-v)
        total += w * (ball_volume(dim, hi) - ball_volume(dim, prev))
        prev = hi
    return PotentialConstants(total, 0.0, len(potential.radii))


def load_tabulated(path) -> Tabulated:
    """Read a 'radius value' per-line table; 'inf' values are accepted."""
    radii, values = [], []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{ln}: expected 'radius value'")
            radii.append(float(parts[0]))
            values.append(float(parts[1]))
    return Tabulated(radii, values)


def pack_table(potential: PairPotential) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoint arrays consumed by the energy kernels."""
    if isinstance(potential, Tabulated):
        return (np.asarray(potential.radii, dtype=float),
                np.asarray(potential.values, dtype=float))
    return np.empty(0), np.empty(0)


def kind_code(potential: PairPotential) -> int:
    if isinstance(potential, HardSphere):
        return 1
    if isinstance(potential, Strauss):
        return 0 if potential.A == 0.0 else 2
    return 3
