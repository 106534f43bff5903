"""Bounded intensity functions: constructors, tilting, and support queries.

An activity function here is a closed symbolic composition

    value(x) = base * scale * prod(mask indicators) * prod(tilt factors)

rather than a sampled grid, so boundedness and support separation can be
answered exactly.  Masks are region indicators; a tilt contributes
e^{-phi(x - y)} (optionally only within a cutoff radius of y, which is the
form the density recursion needs).  Tilting never increases the value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry as geom
from . import potential as pot

INF = float("inf")

# mask row codes shared with the sampling kernels
BOX_IN, HALF_SPACE, SLAB, BALL_IN, BALL_OUT, BOX_OUT = range(6)


@dataclass(frozen=True)
class Mask:
    code: int
    a: tuple  # lo / normal / center
    b: tuple  # hi / (offset,) / (lo,hi) / (radius,)

    def indicator(self, xs: np.ndarray, region) -> np.ndarray:
        a = np.asarray(self.a)
        b = np.asarray(self.b)
        if self.code in (BOX_IN, BOX_OUT):
            inside = np.all((xs >= a) & (xs < b), axis=1)
            return inside if self.code == BOX_IN else ~inside
        if self.code == HALF_SPACE:
            return xs @ a >= b[0]
        if self.code == SLAB:
            s = xs @ a
            return (s >= b[0]) & (s <= b[1])
        diffs = np.stack([geom.displacement(region, a, x) for x in xs])
        inside = np.linalg.norm(diffs, axis=1) <= b[0]
        return inside if self.code == BALL_IN else ~inside


@dataclass(frozen=True)
class Tilt:
    point: tuple
    potential: pot.PairPotential
    cutoff: float = INF  # factor applies only when ||x - point|| < cutoff

    def log_factor(self, xs: np.ndarray, region) -> np.ndarray:
        p = np.asarray(self.point)
        d = np.array([geom.distance(region, p, x) for x in xs])
        phi = np.array([pot.evaluate_radial(self.potential, s) for s in d])
        out = np.where(d < self.cutoff, -phi, 0.0)
        return out


@dataclass(frozen=True)
class ActivityFunction:
    dim: int
    base: float
    scale: float = 1.0
    masks: tuple = ()
    tilts: tuple = ()

    def __post_init__(self):
        if self.base < 0:
            raise ValueError("activity level must be nonnegative")
        if not 0.0 <= self.scale <= 1.0:
            raise ValueError("scale multiplier must lie in [0, 1]")

    @property
    def bound(self) -> float:
        return self.base * self.scale

    def value(self, x, region=None) -> float:
        return float(self.values(np.asarray(x, dtype=float)[None, :], region)[0])

    def values(self, xs: np.ndarray, region=None) -> np.ndarray:
        """Pointwise values at the rows of xs (torus region wraps distances)."""
        if region is None:
            region = _free_space(self.dim)
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        out = np.full(len(xs), self.bound)
        for m in self.masks:
            out = np.where(m.indicator(xs, region), out, 0.0)
        alive = out > 0
        if np.any(alive):
            logf = np.zeros(len(xs))
            for t in self.tilts:
                logf = logf + t.log_factor(xs, region)
            out = np.where(alive, out * np.where(np.isneginf(logf), 0.0, np.exp(logf)), out)
        return out

    def scaled(self, t: float) -> "ActivityFunction":
        return replace(self, scale=t)

    def masked(self, mask: Mask) -> "ActivityFunction":
        return replace(self, masks=self.masks + (mask,))

    def tilted(self, points, potential, cutoff=INF) -> "ActivityFunction":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        new = tuple(Tilt(tuple(p), potential, cutoff) for p in pts)
        return replace(self, tilts=self.tilts + new)

    def support_bbox(self):
        """Conservative axis-aligned bounds on the support, or None if unbounded."""
        lo = np.full(self.dim, -INF)
        hi = np.full(self.dim, INF)
        for m in self.masks:
            if m.code == BOX_IN:
                lo = np.maximum(lo, m.a)
                hi = np.minimum(hi, m.b)
            elif m.code == BALL_IN:
                c = np.asarray(m.a)
                lo = np.maximum(lo, c - m.b[0])
                hi = np.minimum(hi, c + m.b[0])
            elif m.code == HALF_SPACE:
                u = np.asarray(m.a)
                axis = np.nonzero(np.abs(np.abs(u) - 1.0) < 1e-12)[0]
                if axis.size == 1:
                    i = axis[0]
                    if u[i] > 0:
                        lo[i] = max(lo[i], m.b[0])
                    else:
                        hi[i] = min(hi[i], -m.b[0])
            elif m.code == SLAB:
                u = np.asarray(m.a)
                axis = np.nonzero(np.abs(np.abs(u) - 1.0) < 1e-12)[0]
                if axis.size == 1:
                    i = axis[0]
                    a, b = (m.b[0], m.b[1]) if u[i] > 0 else (-m.b[1], -m.b[0])
                    lo[i] = max(lo[i], a)
                    hi[i] = min(hi[i], b)
        if np.any(np.isinf(lo)) or np.any(np.isinf(hi)):
            return None
        return lo, hi

    def compile_rows(self):
        """(mask_rows, tilt_rows) in the packed layout the kernels read.

        Row layout: [code, 0, a_0..a_{d-1}, b_0..b_{max(d,2)-1}].
        """
        d = self.dim
        bwidth = max(d, 2)
        rows = np.zeros((len(self.masks), 2 + d + bwidth))
        for i, m in enumerate(self.masks):
            rows[i, 0] = m.code
            rows[i, 2:2 + len(m.a)] = m.a
            rows[i, 2 + d:2 + d + len(m.b)] = m.b
        tilts = np.zeros((len(self.tilts), d + 1))
        for i, t in enumerate(self.tilts):
            tilts[i, :d] = t.point
            tilts[i, d] = t.cutoff
        return rows, tilts


def _free_space(dim):
    # stand-in region for plain Euclidean evaluation
    return geom.Box([-1e300] * dim, [1e300] * dim)


def _unit(u):
    u = np.asarray(u, dtype=float)
    if not math.isclose(float(np.linalg.norm(u)), 1.0, rel_tol=1e-9):
        raise ValueError("direction must be a unit vector")
    return u


def uniform_on(region, level: float) -> ActivityFunction:
    """Constant level on a bounded region, 0 outside."""
    d = geom.dim_of(region)
    if isinstance(region, geom.Torus):
        return ActivityFunction(d, level)
    if isinstance(region, geom.Ball):
        m = Mask(BALL_IN, tuple(region.center), (region.radius,))
        return ActivityFunction(d, level, masks=(m,))
    lo, hi = geom.bounding_box(region)
    return ActivityFunction(d, level, masks=(Mask(BOX_IN, tuple(lo), tuple(hi)),))


def half_space(dim: int, u, level: float, offset: float = 0.0) -> ActivityFunction:
    """level * 1{<u, x> >= offset}."""
    u = _unit(u)
    if u.size != dim:
        raise ValueError("direction dimension mismatch")
    m = Mask(HALF_SPACE, tuple(u), (float(offset),))
    return ActivityFunction(dim, level, masks=(m,))


def slab(dim: int, u, level: float, lo: float, hi: float) -> ActivityFunction:
    """level * 1{<u, x> in [lo, hi]}."""
    u = _unit(u)
    m = Mask(SLAB, tuple(u), (float(lo), float(hi)))
    return ActivityFunction(dim, level, masks=(m,))


def quadrant(dim: int, u, v, level: float) -> ActivityFunction:
    """level * 1{<u, x> >= 0} * 1{<v, x> >= 0}."""
    return half_space(dim, u, level).masked(
        Mask(HALF_SPACE, tuple(_unit(v)), (0.0,)))


def recursion_tilt(fn: ActivityFunction, v, w, potential) -> ActivityFunction:
    """Tilt by v applied only inside the ball of radius ||v - w|| around v."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    cutoff = float(np.linalg.norm(v - w))
    return fn.tilted(v[None, :], potential, cutoff=cutoff)


def window(fn: ActivityFunction, center, radius: float, shape: str = "box") -> ActivityFunction:
    """Truncate the support to a box or ball around `center` (for estimators)."""
    c = np.asarray(center, dtype=float)
    if shape == "ball":
        return fn.masked(Mask(BALL_IN, tuple(c), (float(radius),)))
    return fn.masked(Mask(BOX_IN, tuple(c - radius), tuple(c + radius)))


def tilt_by_points(fn: ActivityFunction, points, potential) -> ActivityFunction:
    """Multiply by e^{-phi(x - y)} for each boundary point y."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return fn
    if pts.shape[1] != fn.dim:
        raise ValueError("boundary point dimension mismatch")
    return fn.tilted(pts, potential)


def _box_to_box_distance(alo, ahi, blo, bhi) -> float:
    gaps = np.maximum(np.maximum(blo - ahi, alo - bhi), 0.0)
    return float(np.linalg.norm(gaps))


def _target_bounds(target) -> tuple[np.ndarray, np.ndarray]:
    return geom.bounding_box(target)


def _diff_regions(a: ActivityFunction, b: ActivityFunction):
    """Bounding descriptions of where a and b can differ; None = unknown."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    regions = []
    if not (a.base == b.base and a.scale == b.scale):
        return None  # differ anywhere either is supported
    ma, mb = list(a.masks), list(b.masks)
    for m in ma[:]:
        if m in mb:
            ma.remove(m)
            mb.remove(m)
    for m in ma + mb:
        # an added/removed indicator changes values only where it is 0
        if m.code == BOX_IN:
            regions.append(("box_out", np.asarray(m.a), np.asarray(m.b)))
        elif m.code == BOX_OUT:
            regions.append(("box", np.asarray(m.a), np.asarray(m.b)))
        elif m.code == BALL_IN:
            regions.append(("ball_out", np.asarray(m.a), m.b[0]))
        elif m.code == BALL_OUT:
            regions.append(("ball", np.asarray(m.a), m.b[0]))
        elif m.code == HALF_SPACE:
            regions.append(("halfspace_out", np.asarray(m.a), m.b[0]))
        else:
            return None
    ta, tb = list(a.tilts), list(b.tilts)
    for t in ta[:]:
        if t in tb:
            ta.remove(t)
            tb.remove(t)
    for t in ta + tb:
        reach = min(pot.range_of(t.potential), t.cutoff)
        regions.append(("ball", np.asarray(t.point), reach))
    return regions


def support_separation(a: ActivityFunction, b: ActivityFunction, target) -> float:
    """Lower bound on dist(target, supp(a - b)); +inf when a == b structurally.

    Exact for differences expressible in the constructor algebra; anything
    it cannot bound reports 0 (conservative).
    """
    regions = _diff_regions(a, b)
    if regions is None:
        return 0.0
    if not regions:
        return INF
    tlo, thi = _target_bounds(target)
    best = INF
    for kind, p, q in regions:
        if kind == "box":
            d = _box_to_box_distance(tlo, thi, p, q)
        elif kind == "ball":
            # distance from box to ball: clamp center into box, then subtract radius
            nearest = np.clip(p, tlo, thi)
            d = max(0.0, float(np.linalg.norm(nearest - p)) - q)
        elif kind == "box_out":
            # complement of a box: 0 unless the target sits strictly inside
            inside = np.all(tlo >= p) and np.all(thi <= q)
            d = float(min(np.min(tlo - p), np.min(q - thi))) if inside else 0.0
        elif kind == "ball_out":
            corners = _box_corners(tlo, thi)
            far = max(float(np.linalg.norm(c - p)) for c in corners)
            d = max(0.0, q - far)
        elif kind == "halfspace_out":
            # difference lives where <u,x> < c
            s_min = _support_min(p, tlo, thi)
            d = max(0.0, s_min - q)
        else:
            return 0.0
        best = min(best, d)
    return best


def _box_corners(lo, hi):
    d = lo.size
    return [np.where([(i >> k) & 1 for k in range(d)], hi, lo) for i in range(1 << d)]


def _support_min(u, lo, hi) -> float:
    return float(np.sum(np.where(u >= 0, u * lo, u * hi)))
