"""Exact Poisson sampling by thinning and the radius-L block dynamics chain.

One block update resamples the points inside a random ball from the
conditional Gibbs law given everything outside, via acceptance-rejection
against the activity-intensity Poisson proposal.  Each update is in detailed
balance with the target measure, so the chain is reversible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import activity as act
from . import backend
from . import geometry as geom
from . import potential as pot
from .rng import generator

DEFAULT_MAX_REJECTS = 10 ** 6


@dataclass(frozen=True)
class GibbsModel:
    """Geometry, pair potential, and activity function."""

    region: geom.Region
    potential: pot.PairPotential
    activity: act.ActivityFunction

    def __post_init__(self):
        if self.activity.dim != geom.dim_of(self.region):
            raise ValueError("activity dimension does not match the region")
        if not math.isfinite(self.activity.bound):
            raise ValueError("activity bound must be finite")

    @property
    def dim(self):
        return geom.dim_of(self.region)

    def pack(self) -> backend.ModelPack:
        return backend.make_pack(self.region, self.potential, self.activity)

    def energy_pack(self) -> backend.ModelPack:
        return backend.make_pack(self.region, self.potential)


def uniform_model(region, potential, level: float) -> GibbsModel:
    """Constant activity `level` on the region."""
    return GibbsModel(region, potential, act.uniform_on(region, level))


@dataclass(frozen=True)
class PointConfiguration:
    """A finite point set; the state of a chain."""

    points: np.ndarray  # (k, dim)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2:
            raise ValueError("points must be a (k, dim) array")
        object.__setattr__(self, "points", p)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


def empty_configuration(dim: int) -> PointConfiguration:
    return PointConfiguration(np.zeros((0, dim)))


@dataclass
class BlockDynamicsConfig:
    """Knobs for the block dynamics.

    `L` defaults to twice the potential range (or 1 for an interaction-free
    model).  Steps are T when given, else ceil(C * n * log(n / tv_epsilon))
    with n the supported volume.
    """

    L: float | None = None
    T: int | None = None
    mixing_const: float = 10.0
    tv_epsilon: float = 1e-2
    max_rejects: int = DEFAULT_MAX_REJECTS

    def update_radius(self, potential) -> float:
        if self.L is not None:
            return self.L
        r = pot.range_of(potential)
        return 2.0 * r if r > 0 else 1.0

    def steps(self, supported_volume: float) -> int:
        if self.T is not None:
            return max(1, int(self.T))
        n = max(1.0, supported_volume)
        return max(1, math.ceil(self.mixing_const * n * math.log(n / self.tv_epsilon)))


def supported_volume(model: GibbsModel) -> float:
    """Volume of the activity support's bounding box clipped to the region."""
    glo, ghi = geom.bounding_box(model.region)
    bbox = model.activity.support_bbox()
    if bbox is None:
        return float(np.prod(ghi - glo))
    lo = np.maximum(glo, bbox[0])
    hi = np.minimum(ghi, bbox[1])
    return float(np.prod(np.maximum(hi - lo, 0.0)))


@dataclass(frozen=True)
class ChainState:
    """Configuration plus the chain's stream coordinates and cell index."""

    configuration: PointConfiguration
    step: int
    seed: int
    chain_id: int
    purpose: str
    index: geom.CellIndex | None = None


def sample_poisson(fn: act.ActivityFunction, region, rng: np.random.Generator) -> PointConfiguration:
    """Draw from the Poisson process with intensity fn on a bounded region.

    Homogeneous Poisson(bound * |region bbox|) placement followed by
    independent thinning with keep probability fn(x) / bound, with points
    outside the region discarded by the same thinning step.
    """
    d = geom.dim_of(region)
    lo, hi = geom.bounding_box(region)
    vol = float(np.prod(hi - lo))
    bound = fn.bound
    if bound <= 0 or vol <= 0:
        return empty_configuration(d)
    n = rng.poisson(bound * vol)
    xs = lo + rng.random((n, d)) * (hi - lo)
    if n == 0:
        return empty_configuration(d)
    keep = rng.random(n) * bound < fn.values(xs, region)
    inside = np.array([geom.contains(region, x) for x in xs])
    return PointConfiguration(xs[keep & inside])


def block_update(state: ChainState, model: GibbsModel, cfg: BlockDynamicsConfig) -> ChainState:
    """One block-dynamics step (resample a random radius-L ball)."""
    L = cfg.update_radius(model.potential)
    out = backend.chain_run(model.pack(), state.configuration.points, L,
                            step0=state.step, nsteps=1, seed=state.seed,
                            chain=state.chain_id, purpose=state.purpose,
                            max_rejects=cfg.max_rejects)
    config = PointConfiguration(out)
    index = None
    if state.index is not None:
        index = geom.CellIndex.from_points(model.region, state.index.cell_size, out)
    return replace(state, configuration=config, step=state.step + 1, index=index)


def run_chain(model: GibbsModel, cfg: BlockDynamicsConfig, seed: int,
              chain_id: int = 0, purpose: str = "chain",
              initial: PointConfiguration | None = None,
              step0: int = 0) -> PointConfiguration:
    """Run T block updates from the empty configuration (valid for any
    repulsive potential) and return the final configuration."""
    L = cfg.update_radius(model.potential)
    T = cfg.steps(supported_volume(model))
    x0 = initial.points if initial is not None else np.zeros((0, model.dim))
    out = backend.chain_run(model.pack(), x0, L, step0=step0, nsteps=T,
                            seed=seed, chain=chain_id, purpose=purpose,
                            max_rejects=cfg.max_rejects)
    return PointConfiguration(out)


def new_state(model: GibbsModel, seed: int, chain_id: int = 0,
              purpose: str = "chain", with_index: bool = True) -> ChainState:
    index = None
    if with_index:
        cell = max(pot.range_of(model.potential), 1e-9)
        index = geom.CellIndex(model.region, cell)
    return ChainState(empty_configuration(model.dim), 0, seed, chain_id, purpose, index)


def hard_core_valid(model: GibbsModel, config: PointConfiguration) -> bool:
    """No pair closer than the potential's hard-core radius."""
    rc = pot.hard_core_radius(model.potential)
    if rc == 0.0 or len(config) < 2:
        return True
    return backend.min_pair_distance(model.energy_pack(), config.points) >= rc


def write_csv(configs, path) -> None:
    """Dump configurations as 'chain,point,x0,...,x{d-1}' rows."""
    rows = []
    dim = None
    for c, cfg in enumerate(configs):
        pts = cfg.points if isinstance(cfg, PointConfiguration) else np.atleast_2d(cfg)
        dim = pts.shape[1] if pts.size else dim
        for i, p in enumerate(pts):
            rows.append([c, i] + [repr(float(x)) for x in p])
    if dim is None:
        dim = 0
    header = "chain,point," + ",".join(f"x{i}" for i in range(dim))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(x) for x in row) + "\n")


def poisson_rng(seed: int, purpose: str = "poisson", chain: int = 0) -> np.random.Generator:
    return generator(seed, purpose, chain)
