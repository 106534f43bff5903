"""Pressure and surface-pressure estimators, the torus finite-size check,
and the exact 1-D hard-rod oracles.

Identities implemented:
  pressure            p = (one-point density of the half-space activity at 0)
  pressure (alt)      p = integral over t in [0,1] of rho_{t lam}(0) / t
  surface pressure    sp = (1/d) sum_j int_s int_t [rho_{t lam half_j}(s e_j)
                            - rho_{t lam}(0)] / t
  surface pressure    sp = (1 - 1/d) int_t [rho_quadrant(t e2) - rho_half(0)]
  (box, radial phi)
  torus               log Z(torus side n) - n^d p -> 0 exponentially

Ratios rho/t are always evaluated in the added-energy form
lam * E e^{-H_v}, which stays finite at t = 0.  Infinite-volume densities
are approximated on truncation windows; the window radius is recorded in
every result.  Paired estimates share chain streams (common random
numbers), so far-field differences cancel sample by sample.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import activity as act
from . import counting
from . import geometry as geom
from . import potential as pot
from .estimators import Estimate, boltzmann_samples, paired_boltzmann
from .sampler import BlockDynamicsConfig, GibbsModel


@dataclass(frozen=True)
class MeshParams:
    """Line mesh t_j = j*h, j = 1..M (node count from the stated scalings
    h ~ c eps / log^{d-1}(1/eps), M ~ C eps^-1 log^d(1/eps) unless pinned)."""

    h: float
    M: int
    c: float
    C: float

    @classmethod
    def from_accuracy(cls, epsilon: float, dim: int, c: float, C: float) -> "MeshParams":
        logi = math.log(1.0 / epsilon)
        h = c * epsilon / logi ** (dim - 1)
        M = int(math.ceil(C * logi ** dim / epsilon))
        return cls(h, M, c, C)

    @property
    def span(self):
        return self.h * self.M


@dataclass(frozen=True)
class ThermoResult:
    estimate: Estimate
    method: str
    constants: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"method": self.method, "constants": self.constants,
                **self.estimate.as_dict()}


def window_radius(epsilon: float, potential, decay_rate: float | None = None,
                  c1: float = 4.0) -> float:
    """Truncation window for infinite-volume densities.

    Uses c1 * log(1/eps) / b with b the measured decay rate when one is
    supplied (see ssm.decay_profile), else the crude default b = 1/r.
    """
    r = pot.range_of(potential)
    b = decay_rate if decay_rate else 1.0 / max(r, 1e-9)
    return max(2.0 * r, c1 * math.log(1.0 / epsilon) / b)


def _gauss01(n: int):
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def estimate_pressure(potential, level: float, epsilon: float, seed: int,
                      dim: int = 1, n_samples: int | None = None,
                      window: float | None = None,
                      decay_rate: float | None = None,
                      chain_cfg: BlockDynamicsConfig | None = None,
                      threads: int = 1) -> ThermoResult:
    """Pressure as a single one-point density at the half-space corner.

    The half-space activity is truncated to the box [0, s] x [-s, s]^{d-1}
    with s the window radius, and the density at the origin is averaged over
    independent chains.
    """
    t0 = time.perf_counter()
    if level <= 0 or not 0 < epsilon < 1:
        raise ValueError("need level > 0 and epsilon in (0, 1)")
    s = window if window is not None else window_radius(epsilon, potential, decay_rate)
    region = geom.Box([0.0] + [-s] * (dim - 1), [s] * dim)
    model = GibbsModel(region, potential, act.uniform_on(region, level))
    cfg = chain_cfg or BlockDynamicsConfig()
    n = n_samples or max(1000, math.ceil((3.0 * level / epsilon) ** 2))
    tv = epsilon / (3.0 * max(1.0, level))
    v = np.zeros(dim)
    w, T = boltzmann_samples(model, v, tv, n, cfg, seed, "pressure.single", threads)
    w = w[:, 0]
    value = level * float(np.mean(w))
    se = level * float(np.std(w, ddof=1)) / math.sqrt(n)
    est = Estimate(value, se, n, T, seed, time.perf_counter() - t0)
    return ThermoResult(est, "single-density", {
        "window": s, "L": cfg.update_radius(potential), "T": T, "N": n,
        "chain_tv": tv, "mixing_const": cfg.mixing_const, "epsilon": epsilon,
    })


def tonks_pressure_oracle(level: float, rod: float) -> float:
    """The unique p > 0 with p * e^{p r} = level (1-D hard rods), by Newton."""
    if level <= 0 or rod <= 0:
        raise ValueError("level and rod must be positive")
    p = level
    for _ in range(200):
        f = p * math.exp(p * rod) - level
        fp = math.exp(p * rod) * (1.0 + p * rod)
        step = f / fp
        p -= step
        if abs(f) <= 1e-12 * max(1.0, level):
            break
    return p


def pressure_via_interpolation(potential, level: float, epsilon: float, seed: int,
                               dim: int = 1, n_nodes: int = 16,
                               n_samples: int | None = None,
                               window: float | None = None,
                               decay_rate: float | None = None,
                               chain_cfg: BlockDynamicsConfig | None = None,
                               threads: int = 1) -> ThermoResult:
    """Pressure as the activity interpolation integral of rho_{t lam}(0)/t.

    Gauss-Legendre nodes in t; each node estimates lam * E e^{-H_0} for the
    bulk model at activity t*lam on a window box around the origin.
    """
    t0 = time.perf_counter()
    w_rad = window if window is not None else window_radius(epsilon, potential, decay_rate)
    region = geom.Box([-w_rad] * dim, [w_rad] * dim)
    base = act.uniform_on(region, level)
    cfg = chain_cfg or BlockDynamicsConfig()
    nodes, weights = _gauss01(n_nodes)
    n = n_samples or max(200, math.ceil((3.0 * level / epsilon) ** 2 / n_nodes))
    tv = epsilon / (3.0 * max(1.0, level))
    v = np.zeros(dim)
    total = 0.0
    var = 0.0
    steps = 0
    for i, (t, gw) in enumerate(zip(nodes, weights)):
        model = GibbsModel(region, potential, base.scaled(t))
        wts, T = boltzmann_samples(model, v, tv, n, cfg, seed,
                                   f"pressure.interp.{i}", threads)
        wts = wts[:, 0]
        total += gw * level * float(np.mean(wts))
        var += (gw * level * float(np.std(wts, ddof=1)) / math.sqrt(n)) ** 2
        steps += T * n
    est = Estimate(total, math.sqrt(var), n, steps, seed, time.perf_counter() - t0)
    return ThermoResult(est, "interpolation", {
        "window": w_rad, "t_nodes": n_nodes, "N_per_node": n,
        "L": cfg.update_radius(potential), "chain_tv": tv, "epsilon": epsilon,
    })


def _face_window(dim: int, w: float, span: float) -> geom.Box:
    """Window with axis 1 clipped at the face and axis 2 carrying the mesh."""
    lo = [0.0] + [-w] * (dim - 1)
    hi = [w, span + w] + [w] * (dim - 2)
    return geom.Box(lo, hi)


def surface_pressure_box(potential, level: float, epsilon: float, seed: int,
                         dim: int = 2, mesh: MeshParams | None = None,
                         n_samples: int = 2000,
                         window: float | None = None,
                         decay_rate: float | None = None,
                         chain_cfg: BlockDynamicsConfig | None = None,
                         threads: int = 1) -> ThermoResult:
    """Surface pressure from the quadrant identity (radial phi, dim >= 2):

        sp = (1 - 1/d) * int_0^inf (rho_quadrant(t e2) - rho_half(0)) dt.

    The quadrant and half-space models share one window geometry and one
    set of chain streams; the integrand is the coupled per-sample
    difference of e^{-H} weights evaluated at every mesh node, with the
    half-space weight standing in for rho_half(0) by translation
    invariance along the face.
    """
    t0 = time.perf_counter()
    if dim < 2:
        raise ValueError("the quadrant identity needs dim >= 2 (empty face sum at dim = 1)")
    r = pot.range_of(potential)
    w_rad = window if window is not None else window_radius(epsilon, potential, decay_rate)
    mesh = mesh or MeshParams(h=r / 4.0, M=int(math.ceil(1.5 * w_rad / (r / 4.0))),
                              c=float("nan"), C=float("nan"))
    span = mesh.span
    region = _face_window(dim, w_rad, span)
    e1 = np.eye(dim)[0]
    e2 = np.eye(dim)[1]
    half = act.uniform_on(region, level).masked(
        act.Mask(act.HALF_SPACE, tuple(e1), (0.0,)))
    quad = half.masked(act.Mask(act.HALF_SPACE, tuple(e2), (0.0,)))
    cfg = chain_cfg or BlockDynamicsConfig()
    tv = epsilon / (3.0 * max(1.0, level))
    ts = mesh.h * np.arange(1, mesh.M + 1)
    vs = np.outer(ts, e2)

    m_quad = GibbsModel(region, potential, quad)
    m_half = GibbsModel(region, potential, half)
    wq, wh, T = paired_boltzmann(m_quad, m_half, vs, tv, n_samples, cfg, seed,
                                 "sp.box", threads)
    per_sample = level * mesh.h * np.sum(wq - wh, axis=1)
    factor = 1.0 - 1.0 / dim
    value = factor * float(np.mean(per_sample))
    se = factor * float(np.std(per_sample, ddof=1)) / math.sqrt(n_samples)
    est = Estimate(value, se, n_samples, 2 * T * n_samples, seed,
                   time.perf_counter() - t0)
    return ThermoResult(est, "mesh-box", {
        "window": w_rad, "h": mesh.h, "M": mesh.M, "span": span,
        "N": n_samples, "T": T, "L": cfg.update_radius(potential),
        "chain_tv": tv, "epsilon": epsilon,
    })


def surface_pressure_interpolation(potential, level: float, epsilon: float, seed: int,
                                   dim: int = 1, n_t_nodes: int = 16,
                                   s_mesh: float | None = None,
                                   n_samples: int = 2000,
                                   window: float | None = None,
                                   decay_rate: float | None = None,
                                   chain_cfg: BlockDynamicsConfig | None = None,
                                   threads: int = 1) -> ThermoResult:
    """Surface pressure from the activity-interpolation identity.

    For radial potentials all face terms agree, so the axis-1 term is
    computed once.  For each Gauss node t, a half-space model and a bulk
    model share the window box and the chain streams; the s integral is a
    midpoint sum of the coupled weight differences, evaluated on the same
    samples for every s node.
    """
    t0 = time.perf_counter()
    r = pot.range_of(potential)
    w_rad = window if window is not None else window_radius(epsilon, potential, decay_rate)
    h = s_mesh if s_mesh is not None else r / 4.0
    s_max = 1.5 * w_rad
    M = int(math.ceil(s_max / h))
    lo = [-w_rad] * dim
    hi = [s_max + w_rad] + [w_rad] * (dim - 1)
    region = geom.Box(lo, hi)
    e1 = np.eye(dim)[0]
    bulk = act.uniform_on(region, level)
    half = bulk.masked(act.Mask(act.HALF_SPACE, tuple(e1), (0.0,)))
    cfg = chain_cfg or BlockDynamicsConfig()
    tv = epsilon / (3.0 * max(1.0, level))
    ss = (np.arange(M) + 0.5) * h
    vs = np.outer(ss, e1)
    nodes, weights = _gauss01(n_t_nodes)

    total = 0.0
    var = 0.0
    steps = 0
    for i, (t, gw) in enumerate(zip(nodes, weights)):
        mh = GibbsModel(region, potential, half.scaled(t))
        mb = GibbsModel(region, potential, bulk.scaled(t))
        whalf, wbulk, T = paired_boltzmann(mh, mb, vs, tv, n_samples, cfg, seed,
                                           f"sp.interp.{i}", threads)
        per_sample = level * h * np.sum(whalf - wbulk, axis=1)
        total += gw * float(np.mean(per_sample))
        var += (gw * float(np.std(per_sample, ddof=1)) / math.sqrt(n_samples)) ** 2
        steps += 2 * T * n_samples
    est = Estimate(total, math.sqrt(var), n_samples, steps, seed,
                   time.perf_counter() - t0)
    return ThermoResult(est, "interpolation", {
        "window": w_rad, "s_mesh": h, "s_max": s_max, "M": M,
        "t_nodes": n_t_nodes, "N_per_node": n_samples,
        "L": cfg.update_radius(potential), "chain_tv": tv, "epsilon": epsilon,
    })


def edge_effect_integral(potential, level: float, epsilon: float, seed: int,
                         dim: int = 1, s_mesh: float | None = None,
                         n_samples: int = 2000,
                         window: float | None = None,
                         decay_rate: float | None = None,
                         chain_cfg: BlockDynamicsConfig | None = None,
                         threads: int = 1) -> Estimate:
    """Monte Carlo estimate of int_0^inf (rho_slab[0,t](0) - rho_half(0)) dt.

    The slab-vs-half-space comparison at the shared face; slab and
    half-space models share the window geometry and chain streams.  Reported
    by the surface-pressure harness without asserting a target value.
    """
    t0 = time.perf_counter()
    r = pot.range_of(potential)
    w_rad = window if window is not None else window_radius(epsilon, potential, decay_rate)
    h = s_mesh if s_mesh is not None else r / 4.0
    t_max = 1.5 * w_rad
    M = int(math.ceil(t_max / h))
    lo = [0.0] + [-w_rad] * (dim - 1)
    hi = [t_max + w_rad] + [w_rad] * (dim - 1)
    region = geom.Box(lo, hi)
    e1 = np.eye(dim)[0]
    half = act.uniform_on(region, level)
    cfg = chain_cfg or BlockDynamicsConfig()
    tv = epsilon / (3.0 * max(1.0, level))
    v = np.zeros(dim)
    ts = (np.arange(M) + 0.5) * h

    m_half = GibbsModel(region, potential, half)
    # every slab node shares the half-model chains, so the node errors are
    # correlated by construction; aggregate per sample for an honest se
    from .sampler import supported_volume
    from dataclasses import replace as _replace
    T = _replace(cfg, tv_epsilon=tv).steps(supported_volume(m_half))
    cfg_pinned = _replace(cfg, T=T)
    wh, _ = boltzmann_samples(m_half, v, tv, n_samples, cfg_pinned, seed,
                              "sp.edge", threads)
    per_sample = np.zeros(n_samples)
    steps = T * n_samples
    for i, t in enumerate(ts):
        slab_fn = half.masked(act.Mask(act.SLAB, tuple(e1), (0.0, float(t))))
        ws, _ = boltzmann_samples(GibbsModel(region, potential, slab_fn), v, tv,
                                  n_samples, cfg_pinned, seed, "sp.edge", threads)
        per_sample += level * h * (ws[:, 0] - wh[:, 0])
        steps += T * n_samples
    total = float(np.mean(per_sample))
    se = float(np.std(per_sample, ddof=1)) / math.sqrt(n_samples)
    return Estimate(total, se, n_samples, steps, seed, time.perf_counter() - t0)


def torus_pressure_gap(potential, level: float, side: float, epsilon: float,
                       seed: int, dim: int = 1,
                       sample_const: float = 64.0,
                       pressure_kwargs: dict | None = None,
                       chain_cfg: BlockDynamicsConfig | None = None,
                       threads: int = 1) -> dict:
    """log Z on the torus minus side^dim times the pressure estimate."""
    t0 = time.perf_counter()
    if side <= 2.0 * pot.range_of(potential):
        raise ValueError("torus side must exceed twice the potential range")
    region = geom.Torus(side, dim)
    model = GibbsModel(region, potential, act.uniform_on(region, level))
    logz = counting.approx_log_partition(model, epsilon, seed,
                                         sample_const=sample_const,
                                         chain_cfg=chain_cfg, threads=threads)
    pres = estimate_pressure(potential, level, epsilon, seed, dim=dim,
                             chain_cfg=chain_cfg, threads=threads,
                             **(pressure_kwargs or {}))
    vol = side ** dim
    gap = logz.value - vol * pres.estimate.value
    se = math.sqrt(logz.std_error ** 2 + (vol * pres.estimate.std_error) ** 2)
    est = Estimate(gap, se, logz.n_samples, logz.chain_steps + pres.estimate.chain_steps,
                   seed, time.perf_counter() - t0)
    return {"gap": est, "log_z": logz, "pressure": pres, "side": side, "volume": vol}


# ---------------------------------------------------------------------------
# Exact 1-D hard-rod helpers (residue constants of the interval oracle).

def tonks_bulk_density(level: float, rod: float) -> float:
    p = tonks_pressure_oracle(level, rod)
    return p / (1.0 + p * rod)


def tonks_halfline_density(s: float, level: float, rod: float) -> float:
    """Density at distance s from the edge of the half-line model."""
    p = tonks_pressure_oracle(level, rod)
    free = max(s - rod, 0.0)
    logz = counting.tonks_log_partition(free, rod, level) if free > 0 else 0.0
    return level * math.exp(logz - p * (s + rod))


def tonks_slab_edge_density(t: float, level: float, rod: float) -> float:
    """Density at the left edge of activity level on [0, t]."""
    if t <= 0:
        return 0.0
    free = max(t - rod, 0.0)
    num = counting.tonks_log_partition(free, rod, level) if free > 0 else 0.0
    return level * math.exp(num - counting.tonks_log_partition(t, rod, level))


def tonks_surface_constant(level: float, rod: float) -> float:
    """Exact surface pressure per endpoint pair: (p r - log(1 + p r)) / 2."""
    p = tonks_pressure_oracle(level, rod)
    return 0.5 * (p * rod - math.log1p(p * rod))


def tonks_edge_integral(level: float, rod: float, t_max: float = 40.0,
                        n: int = 20000) -> float:
    """Exact value of the slab-vs-half-space edge integral for hard rods."""
    p = tonks_pressure_oracle(level, rod)
    ph = level * math.exp(-p * rod)
    ts = (np.arange(n) + 0.5) * (t_max / n)
    vals = np.array([tonks_slab_edge_density(t, level, rod) - ph for t in ts])
    return float(np.sum(vals) * (t_max / n))


def surface_pressure_harness(potential, level: float, epsilon: float, seed: int,
                             dim: int = 1, n_samples: int = 2000,
                             chain_cfg: BlockDynamicsConfig | None = None,
                             threads: int = 1) -> dict:
    """Run both surface-pressure identities side by side plus the edge-effect
    integral, reporting every number without asserting which identity is the
    ground truth.  For 1-D hard rods the exact oracle block is attached."""
    out = {
        "interpolation": surface_pressure_interpolation(
            potential, level, epsilon, seed, dim=dim, n_samples=n_samples,
            chain_cfg=chain_cfg, threads=threads),
        "box": None,
        "edge_integral": edge_effect_integral(
            potential, level, epsilon, seed, dim=dim, n_samples=n_samples,
            chain_cfg=chain_cfg, threads=threads),
        "references": {
            "edge_integral_if_exact_cancellation": 0.0,
            "edge_integral_small_activity_leading":
                0.5 * level ** 2 * pot.range_of(potential) ** 2,
        },
    }
    if dim >= 2:
        out["box"] = surface_pressure_box(potential, level, epsilon, seed, dim=dim,
                                          n_samples=n_samples, chain_cfg=chain_cfg,
                                          threads=threads)
    if dim == 1 and isinstance(potential, pot.HardSphere):
        p = tonks_pressure_oracle(level, potential.r)
        out["oracle"] = {
            "pressure": p,
            "surface_constant": tonks_surface_constant(level, potential.r),
            "edge_integral_exact": tonks_edge_integral(level, potential.r),
        }
    return out
