"""Regions of R^d and the flat torus: membership, volumes, displacements,
and a cell-list index for finite-range neighbor queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _vec(x, dim=None):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a flat coordinate array")
    if dim is not None and v.size != dim:
        raise ValueError(f"dimension mismatch: got {v.size}, expected {dim}")
    return v


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __init__(self, lo, hi):
        lo = _vec(lo)
        hi = _vec(hi, lo.size)
        if np.any(hi <= lo):
            raise ValueError("box side lengths must be positive")
        object.__setattr__(self, "lo", tuple(lo))
        object.__setattr__(self, "hi", tuple(hi))

    @property
    def dim(self):
        return len(self.lo)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __init__(self, center, radius):
        center = _vec(center)
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", tuple(center))
        object.__setattr__(self, "radius", float(radius))

    @property
    def dim(self):
        return len(self.center)


@dataclass(frozen=True)
class HalfSpace:
    """Points x with <normal, x> >= offset."""

    normal: tuple
    offset: float

    def __init__(self, normal, offset):
        normal = _vec(normal)
        n = np.linalg.norm(normal)
        if not math.isclose(n, 1.0, rel_tol=1e-9):
            raise ValueError("half-space normal must be a unit vector")
        object.__setattr__(self, "normal", tuple(normal))
        object.__setattr__(self, "offset", float(offset))

    @property
    def dim(self):
        return len(self.normal)


@dataclass(frozen=True)
class Slab:
    """Points x with <normal, x> in [lo, hi]."""

    normal: tuple
    lo: float
    hi: float

    def __init__(self, normal, lo, hi):
        normal = _vec(normal)
        n = np.linalg.norm(normal)
        if not math.isclose(n, 1.0, rel_tol=1e-9):
            raise ValueError("slab normal must be a unit vector")
        if hi <= lo:
            raise ValueError("slab interval must have positive length")
        object.__setattr__(self, "normal", tuple(normal))
        object.__setattr__(self, "lo", float(lo))
        object.__setattr__(self, "hi", float(hi))

    @property
    def dim(self):
        return len(self.normal)


@dataclass(frozen=True)
class Torus:
    """Flat torus [0, side)^dim with per-axis wraparound."""

    side: float
    dim: int

    def __init__(self, side, dim):
        if side <= 0:
            raise ValueError("torus side length must be positive")
        if dim < 1:
            raise ValueError("dim must be >= 1")
        object.__setattr__(self, "side", float(side))
        object.__setattr__(self, "dim", int(dim))


Region = Box | Ball | HalfSpace | Slab | Torus


class UnboundedRegionError(ValueError):
    pass


def dim_of(region: Region) -> int:
    return region.dim


def is_torus(region: Region) -> bool:
    return isinstance(region, Torus)


def ball_volume(dim: int, radius: float) -> float:
    """Lebesgue volume of a radius-r ball via the closed Gamma form."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0) * radius ** dim


def volume(region: Region) -> float:
    if isinstance(region, Box):
        return float(np.prod(np.asarray(region.hi) - np.asarray(region.lo)))
    if isinstance(region, Torus):
        return region.side ** region.dim
    if isinstance(region, Ball):
        return ball_volume(region.dim, region.radius)
    if isinstance(region, Slab):
        if region.dim == 1:
            return region.hi - region.lo
        raise UnboundedRegionError("slab is unbounded for dim >= 2")
    raise UnboundedRegionError(f"{type(region).__name__} has no finite volume")


def canonicalize(region: Region, x) -> np.ndarray:
    """Canonical coordinates; torus points are wrapped into [0, side)."""
    x = _vec(x, dim_of(region))
    if isinstance(region, Torus):
        return np.mod(x, region.side)
    return x


def contains(region: Region, x) -> bool:
    x = _vec(x, dim_of(region))
    if isinstance(region, Box):
        return bool(np.all(x >= region.lo) and np.all(x <= region.hi))
    if isinstance(region, Torus):
        return True
    if isinstance(region, Ball):
        return bool(np.linalg.norm(x - np.asarray(region.center)) <= region.radius)
    if isinstance(region, HalfSpace):
        return bool(np.dot(region.normal, x) >= region.offset)
    if isinstance(region, Slab):
        s = float(np.dot(region.normal, x))
        return region.lo <= s <= region.hi
    raise TypeError(type(region))


def bounding_box(region: Region) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounds; the torus reports its fundamental domain."""
    if isinstance(region, Box):
        return np.asarray(region.lo), np.asarray(region.hi)
    if isinstance(region, Torus):
        return np.zeros(region.dim), np.full(region.dim, region.side)
    if isinstance(region, Ball):
        c = np.asarray(region.center)
        return c - region.radius, c + region.radius
    if isinstance(region, Slab) and region.dim == 1:
        return np.array([region.lo]), np.array([region.hi])
    raise UnboundedRegionError(f"{type(region).__name__} has no bounding box")


def displacement(region: Region, p, q) -> np.ndarray:
    """q - p in the region's metric; minimum image on the torus."""
    d = dim_of(region)
    p = _vec(p, d)
    q = _vec(q, d)
    v = q - p
    if isinstance(region, Torus):
        n = region.side
        v = np.mod(v + n / 2.0, n) - n / 2.0
    return v


def distance(region: Region, p, q) -> float:
    return float(np.linalg.norm(displacement(region, p, q)))


@dataclass
class CellIndex:
    """Uniform-grid point index supporting exact queries up to the cell size.

    Owned by a single chain; all stored coordinates are canonical.
    """

    region: Region
    cell_size: float
    _cells: dict = field(default_factory=dict, repr=False)
    _points: list = field(default_factory=list, repr=False)
    _live: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError("cell size must be positive")
        lo, hi = bounding_box(self.region)
        self._lo = lo
        if isinstance(self.region, Torus):
            # Round the grid so cells tile the torus exactly; the effective
            # cell size never drops below the requested one.
            n_cells = max(1, int(math.floor(self.region.side / self.cell_size)))
            self._sizes = np.full(self.region.dim, self.region.side / n_cells)
            self._counts = np.full(self.region.dim, n_cells, dtype=int)
        else:
            ext = hi - lo
            counts = np.maximum(1, np.floor(ext / self.cell_size).astype(int))
            self._sizes = np.where(counts > 0, ext / counts, ext)
            self._counts = counts

    @classmethod
    def from_points(cls, region: Region, cell_size: float, points) -> "CellIndex":
        idx = cls(region, cell_size)
        for p in np.atleast_2d(np.asarray(points, dtype=float)):
            idx.insert(p)
        return idx

    def _cell_of(self, x: np.ndarray) -> tuple:
        rel = (x - self._lo) / self._sizes
        cell = np.floor(rel).astype(int)
        if isinstance(self.region, Torus):
            cell = np.mod(cell, self._counts)
        else:
            cell = np.clip(cell, 0, self._counts - 1)
        return tuple(int(c) for c in cell)

    def insert(self, point) -> int:
        x = canonicalize(self.region, point)
        pid = len(self._points)
        self._points.append(x)
        self._live.append(True)
        self._cells.setdefault(self._cell_of(x), []).append(pid)
        return pid

    def remove(self, pid: int) -> None:
        if not self._live[pid]:
            raise KeyError(pid)
        self._live[pid] = False
        cell = self._cell_of(self._points[pid])
        self._cells[cell].remove(pid)

    def point(self, pid: int) -> np.ndarray:
        return self._points[pid]

    def __len__(self):
        return sum(self._live)

    def query(self, center, radius: float) -> list[int]:
        """Ids of live points within `radius` of `center` (insertion order).

        Completeness is only guaranteed up to the cell size.
        """
        if radius > self.cell_size * (1 + 1e-12):
            raise ValueError(
                f"query radius {radius} exceeds cell size {self.cell_size}; rebuild the index"
            )
        x = canonicalize(self.region, center)
        base = np.asarray(self._cell_of(x))
        d = dim_of(self.region)
        hits = []
        seen = set()
        for offset in np.ndindex(*(3,) * d):
            cell = base + np.asarray(offset) - 1
            if isinstance(self.region, Torus):
                cell = np.mod(cell, self._counts)
            elif np.any(cell < 0) or np.any(cell >= self._counts):
                continue
            key = tuple(int(c) for c in cell)
            if key in seen:  # small torus grids alias under wrapping
                continue
            seen.add(key)
            for pid in self._cells.get(key, ()):
                if self._live[pid] and distance(self.region, x, self._points[pid]) <= radius:
                    hits.append(pid)
        return sorted(hits)
