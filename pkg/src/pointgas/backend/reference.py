"""Pure-Python kernels: the executable specification of the sampling contract.

The native extension reimplements exactly this logic; both backends consume
the per-step Philox streams in the same order, so a chain produces
bit-identical configurations on either one.

Randomness consumed by one block-dynamics step (stream keyed by step):
  1. dim uniforms for the update center.
  2. Per acceptance-rejection attempt:
     a. a Knuth-style Poisson draw for the proposal count (variable uniforms;
        zero draws when the mean is zero),
     b. per proposal point: dim position uniforms, then one thinning uniform,
     c. one acceptance uniform.
"""

from __future__ import annotations

import math

import numpy as np

from ..rng import Uniforms
from .common import GEOM_TORUS, POT_HARD, POT_STRAUSS, POT_TABLE, POT_ZERO, ModelPack

INF = float("inf")


class RejectionGuardError(RuntimeError):
    """Raised when one block update exceeds the rejection budget."""


def _phi(pack: ModelPack, s: float) -> float:
    if s >= pack.pot_r:
        return 0.0
    if pack.pot_kind == POT_ZERO:
        return 0.0
    if pack.pot_kind == POT_HARD:
        return INF
    if pack.pot_kind == POT_STRAUSS:
        return pack.pot_a
    for hi, v in zip(pack.tab_r, pack.tab_v):
        if s < hi:
            return float(v)
    return 0.0


def _dist(pack: ModelPack, p, q) -> float:
    acc = 0.0
    for i in range(pack.dim):
        v = q[i] - p[i]
        if pack.geom_kind == GEOM_TORUS:
            side = pack.hi[i]
            v = math.fmod(v + 0.5 * side, side)
            if v < 0.0:
                v += side
            v -= 0.5 * side
        acc += v * v
    return math.sqrt(acc)


def _rel_activity(pack: ModelPack, x) -> float:
    d = pack.dim
    for row in pack.masks:
        code = int(row[0])
        a = row[2:2 + d]
        b = row[2 + d:]
        if code == 0 or code == 5:  # box keep-inside / keep-outside
            inside = all(a[i] <= x[i] < b[i] for i in range(d))
            if inside != (code == 0):
                return 0.0
        elif code == 1:  # half-space
            if sum(a[i] * x[i] for i in range(d)) < b[0]:
                return 0.0
        elif code == 2:  # slab
            s = sum(a[i] * x[i] for i in range(d))
            if not (b[0] <= s <= b[1]):
                return 0.0
        else:  # ball keep-inside (3) / keep-outside (4)
            inside = _dist(pack, a, x) <= b[0]
            if inside != (code == 3):
                return 0.0
    log_f = 0.0
    for row in pack.tilts:
        dd = _dist(pack, row[:d], x)
        if dd < row[d]:
            p = _phi(pack, dd)
            if math.isinf(p):
                return 0.0
            log_f -= p
    return math.exp(log_f)


def _poisson(stream: Uniforms, mu: float) -> int:
    if mu <= 0.0:
        return 0
    if mu > 700.0:
        raise ValueError(f"proposal mean {mu} too large for exact Poisson sampling")
    limit = math.exp(-mu)
    k = 0
    p = 1.0
    while True:
        p *= stream.u01()
        if p <= limit:
            return k
        k += 1


def _pair_energy(pack: ModelPack, pts) -> float:
    total = 0.0
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            total += _phi(pack, _dist(pack, pts[i], pts[j]))
            if math.isinf(total):
                return INF
    return total


def _cross(pack: ModelPack, ys, xs) -> float:
    total = 0.0
    for y in ys:
        for x in xs:
            total += _phi(pack, _dist(pack, y, x))
            if math.isinf(total):
                return INF
    return total


def _block_update(pack: ModelPack, pts, L, stream, max_rejects):
    d = pack.dim
    y = [0.0] * d
    for i in range(d):
        u = stream.u01()
        if pack.geom_kind == GEOM_TORUS:
            y[i] = u * pack.hi[i]
        else:
            y[i] = pack.lo[i] + u * (pack.hi[i] - pack.lo[i])

    keep = [p for p in pts if _dist(pack, y, p) > L]

    starts = [0.0] * d
    lens = [0.0] * d
    vol = 1.0
    for i in range(d):
        if pack.geom_kind == GEOM_TORUS:
            side = pack.hi[i]
            if 2.0 * L >= side:
                starts[i], lens[i] = 0.0, side
            else:
                starts[i] = math.fmod(y[i] - L, side)
                if starts[i] < 0.0:
                    starts[i] += side
                lens[i] = 2.0 * L
        else:
            starts[i] = max(pack.lo[i], y[i] - L)
            lens[i] = min(pack.hi[i], y[i] + L) - starts[i]
        vol *= lens[i]
    mu = pack.act_bound * vol

    for _ in range(max_rejects):
        k = _poisson(stream, mu)
        proposal = []
        for _j in range(k):
            x = [0.0] * d
            for i in range(d):
                u = stream.u01()
                x[i] = starts[i] + u * lens[i]
                if pack.geom_kind == GEOM_TORUS:
                    side = pack.hi[i]
                    if x[i] >= side:
                        x[i] -= side
            u_thin = stream.u01()
            if _dist(pack, y, x) <= L and u_thin < _rel_activity(pack, x):
                proposal.append(x)
        h = _pair_energy(pack, proposal)
        if not math.isinf(h):
            h += _cross(pack, proposal, keep)
        u_acc = stream.u01()
        prob = 0.0 if math.isinf(h) else math.exp(-h)
        if u_acc < prob:
            return keep + proposal
    raise RejectionGuardError(
        f"block update rejected {max_rejects} proposals; "
        f"mean proposal size {mu:.3g}, boundary points {len(keep)}"
    )


def chain_run(pack: ModelPack, x0: np.ndarray, L: float, step0: int, nsteps: int,
              seed: int, chain: int, pid: int, max_rejects: int) -> np.ndarray:
    pts = [list(map(float, row)) for row in np.atleast_2d(x0)] if len(x0) else []
    for s in range(step0, step0 + nsteps):
        stream = Uniforms(seed, "", chain=chain, step=s, _pid=pid)
        pts = _block_update(pack, pts, L, stream, max_rejects)
    out = np.asarray(pts, dtype=float)
    return out.reshape(len(pts), pack.dim)


def total_energy(pack: ModelPack, pts: np.ndarray) -> float:
    return _pair_energy(pack, np.atleast_2d(pts)) if len(pts) else 0.0


def cross_energy(pack: ModelPack, a: np.ndarray, b: np.ndarray) -> float:
    if len(a) == 0 or len(b) == 0:
        return 0.0
    return _cross(pack, np.atleast_2d(a), np.atleast_2d(b))


def added_energy_many(pack: ModelPack, pts: np.ndarray, vs: np.ndarray) -> np.ndarray:
    vs = np.atleast_2d(vs)
    pts = np.atleast_2d(pts) if len(pts) else pts
    out = np.zeros(len(vs))
    for i, v in enumerate(vs):
        out[i] = _cross(pack, [v], pts) if len(pts) else 0.0
    return out


def rel_activity_many(pack: ModelPack, xs: np.ndarray) -> np.ndarray:
    xs = np.atleast_2d(xs)
    return np.array([_rel_activity(pack, x) for x in xs])


def min_pair_distance(pack: ModelPack, pts: np.ndarray) -> float:
    pts = np.atleast_2d(pts)
    best = INF
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = min(best, _dist(pack, pts[i], pts[j]))
    return best
