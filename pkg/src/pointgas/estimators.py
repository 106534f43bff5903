"""Energy functionals and Monte Carlo estimators for one-point densities,
emptiness probabilities, and factorized k-point densities.

The density estimator follows the independent-chains scheme: N chains, each
run T = C n log(n / eps) block updates from empty, averaged as
activity(v) * mean e^{-H_v}.  Every sample weight lies in [0, 1], so the
estimator is deterministically bounded by the activity bound and its
variance by bound^2 / N.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import activity as act
from . import backend
from . import geometry as geom
from .parallel import parallel_map
from .sampler import BlockDynamicsConfig, GibbsModel, PointConfiguration, supported_volume


@dataclass(frozen=True)
class Estimate:
    """Universal Monte Carlo result record."""

    value: float
    std_error: float
    n_samples: int
    chain_steps: int
    seed: int
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "chain_steps": self.chain_steps,
            "seed": self.seed,
            "wall_time_s": self.wall_time,
        }


@dataclass
class DensityRequest:
    model: GibbsModel
    v: np.ndarray
    epsilon: float = 0.01
    n_samples: int = 1000
    chain: BlockDynamicsConfig = field(default_factory=BlockDynamicsConfig)

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        if self.epsilon <= 0:
            raise ValueError("bias target must be positive")
        if self.n_samples < 1:
            raise ValueError("need at least one sample")


def added_energy(potential, region, config, v, index: geom.CellIndex | None = None) -> float:
    """Energy cost of inserting v: sum of phi(v - x) over the configuration.

    With a cell index, only the radius-r neighborhood is scanned; otherwise
    the sum runs over all points (identical result, finite range).
    """
    pts = config.points if isinstance(config, PointConfiguration) else np.atleast_2d(config)
    if len(pts) == 0:
        return 0.0
    if index is not None:
        from . import potential as pot

        ids = index.query(v, pot.range_of(potential))
        pts = np.array([index.point(i) for i in ids]) if ids else np.zeros((0, len(v)))
        if len(pts) == 0:
            return 0.0
    pack = backend.make_pack(region, potential)
    return float(backend.added_energy_many(pack, pts, np.asarray(v, dtype=float))[0])


def total_energy(potential, region, config) -> float:
    """Sum of phi over unordered pairs of the configuration."""
    pts = config.points if isinstance(config, PointConfiguration) else np.atleast_2d(config)
    if len(pts) < 2:
        return 0.0
    pack = backend.make_pack(region, potential)
    return backend.total_energy(pack, pts)


def boltzmann_samples(model: GibbsModel, vs, tv_epsilon: float, n_samples: int,
                      chain_cfg: BlockDynamicsConfig, seed: int, purpose: str,
                      threads: int = 1) -> tuple[np.ndarray, int]:
    """Matrix of e^{-H_v(X_j)} over N independent chains and evaluation points.

    Chains share nothing but the master seed; sample j uses stream
    (seed, purpose, j), so two calls with equal seeds and purposes are
    coupled sample by sample (common random numbers).
    """
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    cfg = replace(chain_cfg, tv_epsilon=tv_epsilon)
    L = cfg.update_radius(model.potential)
    T = cfg.steps(supported_volume(model))
    pack = model.pack()
    epack = model.energy_pack()
    empty = np.zeros((0, model.dim))

    def one(j):
        pts = backend.chain_run(pack, empty, L, 0, T, seed, j, purpose, cfg.max_rejects)
        h = backend.added_energy_many(epack, pts, vs)
        w = np.exp(-h)
        w[np.isinf(h)] = 0.0
        return w

    rows = parallel_map(one, n_samples, threads)
    return np.vstack(rows), T


def paired_boltzmann(model_a: GibbsModel, model_b: GibbsModel, vs,
                     tv_epsilon: float, n_samples: int,
                     chain_cfg: BlockDynamicsConfig, seed: int, purpose: str,
                     threads: int = 1) -> tuple[np.ndarray, np.ndarray, int]:
    """Coupled weight matrices for two models on shared chain streams.

    The step count is pinned to the larger of the two supported volumes:
    common random numbers only cancel when both chains consume the same
    steps, so a shared T is part of the coupling contract.
    """
    vol = max(supported_volume(model_a), supported_volume(model_b))
    cfg = replace(chain_cfg, T=replace(chain_cfg, tv_epsilon=tv_epsilon).steps(vol))
    wa, T = boltzmann_samples(model_a, vs, tv_epsilon, n_samples, cfg, seed,
                              purpose, threads)
    wb, _ = boltzmann_samples(model_b, vs, tv_epsilon, n_samples, cfg, seed,
                              purpose, threads)
    return wa, wb, T


def estimate_density(req: DensityRequest, seed: int, purpose: str = "density",
                     threads: int = 1) -> Estimate:
    """Monte Carlo estimate of the one-point density at req.v."""
    t0 = time.perf_counter()
    av = req.model.activity.value(req.v, req.model.region)
    if av == 0.0:
        return Estimate(0.0, 0.0, 1, 0, seed, time.perf_counter() - t0)
    tv = req.epsilon / max(1.0, req.model.activity.bound)
    w, T = boltzmann_samples(req.model, req.v, tv, req.n_samples, req.chain,
                             seed, purpose, threads)
    w = w[:, 0]
    value = av * float(np.mean(w))
    se = av * float(np.std(w, ddof=1)) / math.sqrt(len(w)) if len(w) > 1 else av
    return Estimate(value, se, len(w), T, seed, time.perf_counter() - t0)


def estimate_emptiness(model: GibbsModel, subregion, n_samples: int,
                       chain_cfg: BlockDynamicsConfig, seed: int,
                       purpose: str = "emptiness", threads: int = 1) -> Estimate:
    """Probability that the process puts no point in `subregion`."""
    t0 = time.perf_counter()
    L = chain_cfg.update_radius(model.potential)
    T = chain_cfg.steps(supported_volume(model))
    pack = model.pack()
    empty = np.zeros((0, model.dim))

    def one(j):
        pts = backend.chain_run(pack, empty, L, 0, T, seed, j, purpose,
                                chain_cfg.max_rejects)
        return 0.0 if any(geom.contains(subregion, p) for p in pts) else 1.0

    ys = np.array(parallel_map(one, n_samples, threads))
    value = float(np.mean(ys))
    se = float(np.std(ys, ddof=1)) / math.sqrt(len(ys)) if len(ys) > 1 else 1.0
    return Estimate(value, se, len(ys), T, seed, time.perf_counter() - t0)


def estimate_kpoint_density(model: GibbsModel, points, epsilon: float,
                            n_samples: int, chain_cfg: BlockDynamicsConfig,
                            seed: int, threads: int = 1) -> Estimate:
    """k-point density as a product of successively tilted one-point densities.

    Point j is estimated under the activity tilted by points 1..j-1; the
    standard error propagates to first order, and an exact zero factor
    short-circuits the product.
    """
    t0 = time.perf_counter()
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals, ses = [], []
    steps = 0
    n_used = 0
    fn = model.activity
    for j, v in enumerate(pts):
        tilted = act.tilt_by_points(fn, pts[:j], model.potential) if j else fn
        sub = GibbsModel(model.region, model.potential, tilted)
        est = estimate_density(DensityRequest(sub, v, epsilon, n_samples, chain_cfg),
                               seed, purpose=f"kpoint.{j}", threads=threads)
        vals.append(est.value)
        ses.append(est.std_error)
        steps += est.chain_steps
        n_used = max(n_used, est.n_samples)
        if est.value == 0.0 and est.std_error == 0.0:
            return Estimate(0.0, 0.0, n_used, steps, seed, time.perf_counter() - t0)
    vals = np.asarray(vals)
    ses = np.asarray(ses)
    value = float(np.prod(vals))
    var = 0.0
    for j in range(len(vals)):
        others = np.prod(np.delete(vals, j)) if len(vals) > 1 else 1.0
        var += (ses[j] * others) ** 2
    return Estimate(value, math.sqrt(var), n_used, steps, seed, time.perf_counter() - t0)
