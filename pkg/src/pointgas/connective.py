"""Monte Carlo estimation of the potential-weighted connective constant.

The k-step walk integral is importance-sampled: increments are drawn from
the normalized density (1 - e^{-phi}) / C_phi (uniform in the range ball
for the built-in kinds), and each walk carries the weight

    prod_j exp( - sum_{i <= j-2} 1{|v_j - v_i| < |v_i - v_{i+1}|} phi(v_j - v_i) )

with v_0 = 0.  The estimate is C_phi^k times the mean weight.  Weights lie
in [0, 1] for repulsive potentials; for a hard core they are pure survival
indicators.  The k-th root curve upper-bounds the limiting constant, so the
reported min over k is an upper-bound estimator only.
"""

from __future__ import annotations

import math
import warnings
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from . import potential as pot
from .estimators import Estimate
from .parallel import parallel_map
from .rng import generator


@dataclass(frozen=True)
class ConnectiveReport:
    vk: tuple            # Estimate per k = 1..k_max
    roots: tuple         # V_k^{1/k}
    delta_hat: float     # min over k of the roots
    c_phi: float
    threshold_delta: float   # e / delta_hat
    threshold_cphi: float    # e / C_phi

    def as_dict(self) -> dict:
        return {
            "vk": [e.as_dict() for e in self.vk],
            "roots": list(self.roots),
            "delta_hat": self.delta_hat,
            "c_phi": self.c_phi,
            "threshold_delta": self.threshold_delta,
            "threshold_cphi": self.threshold_cphi,
        }


def _phi_many(potential, s: np.ndarray) -> np.ndarray:
    if isinstance(potential, pot.HardSphere):
        return np.where(s < potential.r, np.inf, 0.0)
    if isinstance(potential, pot.Strauss):
        return np.where(s < potential.r, potential.A, 0.0)
    out = np.zeros_like(s)
    prev = 0.0
    for hi, v in zip(potential.radii, potential.values):
        out = np.where((s >= prev) & (s < hi), v, out)
        prev = hi
    return out


def _increment_sampler(potential, dim: int):
    """Sampler for the normalized increment density (1 - e^{-phi}) / C_phi."""
    r = pot.range_of(potential)
    if isinstance(potential, (pot.HardSphere, pot.Strauss)):
        radial_cdf = None
    else:
        # piecewise (1 - e^{-v}) * s^{d-1}: build an inverse-CDF table once
        grid = np.linspace(0.0, r, 4097)
        mids = 0.5 * (grid[1:] + grid[:-1])
        dens = -np.expm1(-_phi_many(potential, mids)) * mids ** (dim - 1)
        cdf = np.concatenate([[0.0], np.cumsum(dens)])
        if cdf[-1] <= 0:
            radial_cdf = "degenerate"
        else:
            cdf /= cdf[-1]
            radial_cdf = (grid, cdf)

    def draw(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
        g = rng.standard_normal((n, k, dim))
        norms = np.linalg.norm(g, axis=2, keepdims=True)
        norms[norms == 0] = 1.0
        dirs = g / norms
        u = rng.random((n, k, 1))
        if radial_cdf is None:
            radii = r * u ** (1.0 / dim)
        else:
            grid, cdf = radial_cdf
            radii = np.interp(u, cdf, grid)
        return dirs * radii

    degenerate = radial_cdf == "degenerate"
    return draw, degenerate


def estimate_vk(potential, dim: int, k: int, n_samples: int, seed: int,
                batch: int = 8192, threads: int = 1) -> Estimate:
    """Importance-sampled estimate of the k-step walk integral V_k."""
    t0 = time.perf_counter()
    if k < 1:
        raise ValueError("k must be >= 1")
    c_phi = pot.temperedness(potential, dim).c_phi
    if c_phi == 0.0:
        return Estimate(0.0, 0.0, n_samples, 0, seed, time.perf_counter() - t0)
    if k == 1:
        # the inner sum is empty: every weight is exactly 1
        return Estimate(c_phi, 0.0, n_samples, 0, seed, time.perf_counter() - t0)
    draw, degenerate = _increment_sampler(potential, dim)
    if degenerate:
        return Estimate(0.0, 0.0, n_samples, 0, seed, time.perf_counter() - t0)

    n_batches = int(math.ceil(n_samples / batch))

    def one(b):
        rng = generator(seed, f"connective.k{k}", b)
        m = min(batch, n_samples - b * batch)
        incs = draw(rng, m, k)
        v = np.concatenate([np.zeros((m, 1, dim)), np.cumsum(incs, axis=1)], axis=1)
        log_w = np.zeros(m)
        step_len = np.linalg.norm(incs, axis=2)  # |v_{i+1} - v_i|, i = 0..k-1
        for j in range(2, k + 1):
            for i in range(0, j - 1):
                d_ji = np.linalg.norm(v[:, j, :] - v[:, i, :], axis=1)
                screened = d_ji < step_len[:, i]
                if np.any(screened):
                    log_w = log_w - np.where(screened, _phi_many(potential, d_ji), 0.0)
        w = np.exp(log_w)
        w[np.isneginf(log_w)] = 0.0
        return w

    ws = np.concatenate(parallel_map(one, n_batches, threads))
    mean = float(np.mean(ws))
    if mean == 0.0 and not math.isinf(hard_core_or_inf(potential)):
        raise FloatingPointError(
            f"all {n_samples} walk weights underflowed to zero at k={k}")
    scale = c_phi ** k
    se = scale * float(np.std(ws, ddof=1)) / math.sqrt(len(ws))
    if mean == 0.0:
        se = scale / len(ws)  # survival never observed; crude scale bound
    return Estimate(scale * mean, se, len(ws), 0, seed, time.perf_counter() - t0)


def hard_core_or_inf(potential) -> float:
    rc = pot.hard_core_radius(potential)
    return math.inf if rc > 0 else 0.0


def vk_quadrature_oracle(potential, dim: int, k: int, nodes_log2: int = 20) -> float:
    """Direct quasi-random integration of the walk integral (test oracle).

    Integrates over ([-r, r]^dim)^k with a fixed unscrambled Sobol sequence;
    the increment factors (1 - e^{-phi}) vanish outside the range ball, so
    the cube is a valid integration domain.
    """
    r = pot.range_of(potential)
    n = 1 << nodes_log2
    sob = qmc.Sobol(d=k * dim, scramble=False)
    total = 0.0
    chunk = max(1, (1 << 18) // max(1, k))
    produced = 0
    while produced < n:
        m = min(chunk, n - produced)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            u = sob.random(m).reshape(m, k, dim)
        incs = (2.0 * u - 1.0) * r
        v = np.concatenate([np.zeros((m, 1, dim)), np.cumsum(incs, axis=1)], axis=1)
        step_len = np.linalg.norm(incs, axis=2)
        f = np.ones(m)
        for j in range(1, k + 1):
            f *= -np.expm1(-_phi_many(potential, step_len[:, j - 1]))
        log_w = np.zeros(m)
        for j in range(2, k + 1):
            for i in range(0, j - 1):
                d_ji = np.linalg.norm(v[:, j, :] - v[:, i, :], axis=1)
                screened = d_ji < step_len[:, i]
                if np.any(screened):
                    log_w = log_w - np.where(screened, _phi_many(potential, d_ji), 0.0)
        w = np.where(np.isneginf(log_w), 0.0, np.exp(log_w))
        total += float(np.sum(f * w))
        produced += m
    return (2.0 * r) ** (dim * k) * total / n


def connective_report(potential, dim: int, k_max: int, n_samples: int, seed: int,
                      threads: int = 1) -> ConnectiveReport:
    """Per-k estimates, k-th roots, their min, and the activity thresholds."""
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    c_phi = pot.temperedness(potential, dim).c_phi
    vk = tuple(estimate_vk(potential, dim, k, n_samples, seed, threads=threads)
               for k in range(1, k_max + 1))
    roots = tuple(e.value ** (1.0 / k) if e.value > 0 else 0.0
                  for k, e in enumerate(vk, start=1))
    delta_hat = min(roots) if any(r > 0 for r in roots) else 0.0
    t_delta = math.e / delta_hat if delta_hat > 0 else math.inf
    t_cphi = math.e / c_phi if c_phi > 0 else math.inf
    return ConnectiveReport(vk, roots, delta_hat, c_phi, t_delta, t_cphi)
