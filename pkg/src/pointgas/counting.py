"""Approximate counting of log Z via telescoped emptiness probabilities,
plus exact desk-scale oracles.

The telescoping identity: 1/Z equals the probability of the empty
configuration, which factors over any ordered disjoint cover of the region
into conditional emptiness probabilities of one box at a time, each of them
an expectation under the model with the previously removed boxes masked out
of the activity.  The identity is exact for any disjoint cover, so
non-integer volumes just add remainder slabs.
"""

from __future__ import annotations

import math
import warnings
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import qmc

from . import activity as act
from . import backend
from . import geometry as geom
from .estimators import Estimate
from .parallel import parallel_map
from .sampler import BlockDynamicsConfig, GibbsModel


class OracleToleranceError(RuntimeError):
    """The truncated-series oracle cannot reach the requested tolerance."""


class EstimatorFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class UnitPartition:
    """Ordered disjoint boxes covering a box or torus region."""

    region: geom.Region
    boxes: tuple  # ((lo, hi), ...) in canonical coordinates

    def __len__(self):
        return len(self.boxes)


def unit_partition(region) -> UnitPartition:
    lo, hi = geom.bounding_box(region)
    axes = []
    for a, b in zip(lo, hi):
        edges = [a]
        n_full = int(math.floor(b - a + 1e-9))
        for i in range(1, n_full + 1):
            edges.append(a + i)
        if b - edges[-1] > 1e-9:
            edges.append(b)
        else:
            edges[-1] = b
        axes.append(list(zip(edges[:-1], edges[1:])))
    boxes = []
    for combo in np.ndindex(*[len(ax) for ax in axes]):
        blo = tuple(axes[i][c][0] for i, c in enumerate(combo))
        bhi = tuple(axes[i][c][1] for i, c in enumerate(combo))
        boxes.append((blo, bhi))
    return UnitPartition(region, tuple(boxes))


def _in_half_open(pts: np.ndarray, lo, hi) -> np.ndarray:
    return np.all((pts >= np.asarray(lo)) & (pts < np.asarray(hi)), axis=1)


def approx_log_partition(model: GibbsModel, epsilon: float, seed: int,
                         sample_const: float = 64.0,
                         chain_cfg: BlockDynamicsConfig | None = None,
                         chain_tv: float | None = None,
                         threads: int = 1,
                         factors_out: list | None = None) -> Estimate:
    """log Z by telescoping emptiness factors.

    Draws ceil(sample_const * N / epsilon^2) emptiness samples per factor
    over the N boxes of the unit partition; chains for factor k run on the
    model with boxes 1..k masked out of the activity.
    """
    t0 = time.perf_counter()
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    part = unit_partition(model.region)
    n_boxes = len(part)
    if model.activity.bound == 0.0:
        return Estimate(0.0, 0.0, 1, 0, seed, time.perf_counter() - t0)
    cfg = chain_cfg or BlockDynamicsConfig()
    tv = chain_tv if chain_tv is not None else epsilon / (8.0 * n_boxes)
    cfg = replace(cfg, tv_epsilon=tv)
    n_samples = int(math.ceil(sample_const * n_boxes / epsilon ** 2))

    log_z = 0.0
    var_log = 0.0
    total_steps = 0
    fn = model.activity
    for k in range(n_boxes):
        target_lo, target_hi = part.boxes[k]
        sub = GibbsModel(model.region, model.potential, fn)
        L = cfg.update_radius(model.potential)
        remaining = sum(
            float(np.prod(np.asarray(b[1]) - np.asarray(b[0])))
            for b in part.boxes[k:])
        T = cfg.steps(max(remaining, 1.0))
        pack = sub.pack()
        empty = np.zeros((0, model.dim))
        purpose = f"logz.factor.{k}"

        def one(j):
            pts = backend.chain_run(pack, empty, L, 0, T, seed, j, purpose,
                                    cfg.max_rejects)
            if len(pts) == 0:
                return 1.0
            return 0.0 if bool(np.any(_in_half_open(pts, target_lo, target_hi))) else 1.0

        ys = np.array(parallel_map(one, n_samples, threads))
        q = float(np.mean(ys))
        if q <= 0.0:
            raise EstimatorFailure(
                f"emptiness factor {k} estimated as 0; increase samples")
        se = float(np.std(ys, ddof=1)) / math.sqrt(len(ys))
        if factors_out is not None:
            factors_out.append(Estimate(q, se, len(ys), T, seed, 0.0))
        log_z -= math.log(q)
        var_log += (se / q) ** 2
        total_steps += T * n_samples
        fn = fn.masked(act.Mask(act.BOX_OUT, target_lo, target_hi))
    return Estimate(log_z, math.sqrt(var_log), n_samples, total_steps, seed,
                    time.perf_counter() - t0)


def logz_sweep(model: GibbsModel, seed: int, mesh_h: float = 0.25,
               n_samples: int = 2000, epsilon: float = 0.01,
               chain_cfg: BlockDynamicsConfig | None = None,
               threads: int = 1) -> Estimate:
    """log Z as the integral over the region of one-point densities with a
    first-coordinate sweep mask (constant activity on a box only).

    Midpoint quadrature on mesh width `mesh_h`; the reported standard error
    combines the statistical error with a coarse-mesh Richardson estimate of
    the quadrature error.
    """
    t0 = time.perf_counter()
    if not isinstance(model.region, geom.Box):
        raise ValueError("the sweep identity runs on box regions")
    if model.activity.masks and len(model.activity.masks) != 1:
        raise ValueError("constant activity required")
    cfg = chain_cfg or BlockDynamicsConfig()
    level = model.activity.base

    fine, se_fine, steps = _sweep_sum(model, level, mesh_h, n_samples, epsilon,
                                      cfg, seed, threads)
    coarse, _, steps2 = _sweep_sum(model, level, 2 * mesh_h, max(200, n_samples // 2),
                                   epsilon, cfg, seed, threads)
    quad_err = abs(fine - coarse) / 3.0
    se = math.sqrt(se_fine ** 2 + quad_err ** 2)
    return Estimate(fine, se, n_samples, steps + steps2, seed,
                    time.perf_counter() - t0)


def _sweep_sum(model, level, h, n_samples, epsilon, cfg, seed, threads):
    from .estimators import boltzmann_samples

    lo, hi = geom.bounding_box(model.region)
    d = model.dim
    counts = [max(1, int(round((hi[i] - lo[i]) / h))) for i in range(d)]
    hs = [(hi[i] - lo[i]) / counts[i] for i in range(d)]
    cell_vol = float(np.prod(hs))
    total = 0.0
    var = 0.0
    steps = 0
    nodes = list(np.ndindex(*counts))
    for idx, combo in enumerate(nodes):
        x = np.array([lo[i] + (combo[i] + 0.5) * hs[i] for i in range(d)])
        swept = model.activity.masked(
            act.Mask(act.HALF_SPACE, tuple(np.eye(d)[0]), (float(x[0]),)))
        sub = GibbsModel(model.region, model.potential, swept)
        w, T = boltzmann_samples(sub, x, epsilon / max(1.0, level), n_samples,
                                 cfg, seed, f"logz.sweep.{h:g}.{idx}", threads)
        w = w[:, 0]
        total += cell_vol * level * float(np.mean(w))
        var += (cell_vol * level * float(np.std(w, ddof=1)) / math.sqrt(len(w))) ** 2
        steps += T * n_samples
    return total, math.sqrt(var), steps


def _pair_distance_sq(region, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    v = b - a
    if isinstance(region, geom.Torus):
        n = region.side
        v = np.mod(v + n / 2.0, n) - n / 2.0
    return np.sum(v * v, axis=-1)


def series_log_partition_oracle(model: GibbsModel, tolerance: float,
                                max_order: int = 12,
                                nodes_log2: int = 20) -> float:
    """log Z from the truncated activity series (test oracle).

    Order-k terms are integrated with an unscrambled Sobol sequence of
    2**nodes_log2 nodes (>= 2^20 by default), so values are reproducible
    bit for bit given parameters.  Raises OracleToleranceError when the
    series tail cannot be brought below the tolerance within `max_order`.
    """
    from . import potential as pot

    fn = model.activity
    bound = fn.bound
    if bound == 0.0:
        return 0.0
    lo, hi = geom.bounding_box(model.region)
    bbox = fn.support_bbox()
    if bbox is not None:
        lo = np.maximum(lo, bbox[0])
        hi = np.minimum(hi, bbox[1])
    vol = float(np.prod(np.maximum(hi - lo, 0.0)))
    mu = bound * vol

    order = None
    for k in range(1, max_order + 1):
        tail = sum(mu ** j / math.factorial(j) for j in range(k + 1, k + 60))
        if tail < tolerance:
            order = k
            break
    if order is None:
        raise OracleToleranceError(
            f"series tail above tolerance {tolerance} at order {max_order} "
            f"(activity mass {mu:.3g})")

    d = model.dim
    n_nodes = 1 << nodes_log2
    z = 1.0
    for k in range(1, order + 1):
        sob = qmc.Sobol(d=k * d, scramble=False)
        acc = 0.0
        chunk = max(1, (1 << 17) // max(1, k))
        produced = 0
        while produced < n_nodes:
            m = min(chunk, n_nodes - produced)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                u = sob.random(m).reshape(m, k, d)
            xs = lo + u * (hi - lo)
            w = np.ones(m)
            for j in range(k):
                w *= fn.values(xs[:, j, :], model.region)
            alive = w > 0
            if np.any(alive):
                h = np.zeros(m)
                for i in range(k):
                    for j in range(i + 1, k):
                        s2 = _pair_distance_sq(model.region, xs[:, i, :], xs[:, j, :])
                        h += _phi_radial_many(model.potential, np.sqrt(s2))
                w = np.where(alive, w * np.where(np.isinf(h), 0.0, np.exp(-np.minimum(h, 700))), 0.0)
            acc += float(np.sum(w))
            produced += m
        z += vol ** k * (acc / n_nodes) / math.factorial(k)
    return math.log(z)


def _phi_radial_many(potential, s: np.ndarray) -> np.ndarray:
    from . import potential as pot

    if isinstance(potential, pot.HardSphere):
        return np.where(s < potential.r, np.inf, 0.0)
    if isinstance(potential, pot.Strauss):
        return np.where(s < potential.r, potential.A, 0.0)
    out = np.zeros_like(s)
    prev = 0.0
    for hi_, v in zip(potential.radii, potential.values):
        out = np.where((s >= prev) & (s < hi_), v, out)
        prev = hi_
    return out


def tonks_log_partition(length: float, rod: float, level: float) -> float:
    """Exact log Z for hard rods on an interval: the k-th term has free
    volume (length - (k-1) * rod)_+^k."""
    if length <= 0 or rod <= 0:
        raise ValueError("length and rod diameter must be positive")
    if level == 0.0:
        return 0.0
    terms = [0.0]
    k = 1
    while True:
        free = length - (k - 1) * rod
        if free <= 0:
            break
        terms.append(k * math.log(level) + k * math.log(free) - math.lgamma(k + 1))
        k += 1
    m = max(terms)
    return m + math.log(sum(math.exp(t - m) for t in terms))


def tonks_ring_log_partition(circumference: float, rod: float, level: float) -> float:
    """Exact log Z for hard rods on a circle (minimum-image interaction)."""
    n = circumference
    if n <= rod:
        raise ValueError("circumference must exceed the rod diameter")
    if level == 0.0:
        return 0.0
    terms = [0.0, math.log(level) + math.log(n)]
    k = 2
    while True:
        free = n - k * rod
        if free <= 0:
            break
        terms.append(k * math.log(level) + math.log(n) - math.log(k)
                     + (k - 1) * math.log(free) - math.lgamma(k))
        k += 1
    m = max(terms)
    return m + math.log(sum(math.exp(t - m) for t in terms))
