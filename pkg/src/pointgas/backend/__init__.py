"""Kernel backend selection.

The native (Cython) extension is used when importable; otherwise the pure
Python reference implementation takes over.  Both produce bit-identical
chains.  Set POINTGAS_BACKEND=reference or =native to force a choice.
"""

from __future__ import annotations

import os

import numpy as np

from ..rng import purpose_id
from . import reference
from .common import ModelPack, make_pack

__all__ = [
    "BACKEND", "ModelPack", "make_pack", "chain_run", "total_energy",
    "cross_energy", "added_energy_many", "rel_activity_many",
    "min_pair_distance",
]

_choice = os.environ.get("POINTGAS_BACKEND", "auto")
_native = None
if _choice in ("auto", "native"):
    try:
        from .. import _native
    except ImportError:
        if _choice == "native":
            raise
        _native = None
BACKEND = "native" if _native is not None else "reference"


def _explode(pack: ModelPack):
    return (pack.dim, pack.geom_kind, pack.lo, pack.hi, pack.pot_kind,
            pack.pot_r, pack.pot_a, pack.tab_r, pack.tab_v, pack.act_bound,
            pack.masks, pack.tilts)


def _pts(x, dim) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(x, dtype=float))
    if a.size == 0:
        return np.zeros((0, dim))
    if a.ndim == 1:
        a = a[None, :]
    if a.shape[1] != dim:
        raise ValueError(f"point dimension {a.shape[1]} != {dim}")
    return a


def chain_run(pack: ModelPack, x0, L: float, step0: int, nsteps: int,
              seed: int, chain: int, purpose, max_rejects: int = 10 ** 6) -> np.ndarray:
    """Advance the block dynamics `nsteps` steps from configuration x0."""
    pid = purpose_id(purpose) if isinstance(purpose, str) else int(purpose)
    x0 = _pts(x0, pack.dim)
    if _native is not None:
        return _native.chain_run(*_explode(pack), x0, float(L),
                                 step0, nsteps, seed, chain, pid, max_rejects)
    return reference.chain_run(pack, x0, float(L), step0, nsteps,
                               seed, chain, pid, max_rejects)


def total_energy(pack: ModelPack, pts) -> float:
    pts = _pts(pts, pack.dim)
    if _native is not None:
        return _native.total_energy(*_explode(pack), pts)
    return reference.total_energy(pack, pts)


def cross_energy(pack: ModelPack, a, b) -> float:
    a = _pts(a, pack.dim)
    b = _pts(b, pack.dim)
    if _native is not None:
        return _native.cross_energy(*_explode(pack), a, b)
    return reference.cross_energy(pack, a, b)


def added_energy_many(pack: ModelPack, pts, vs) -> np.ndarray:
    pts = _pts(pts, pack.dim)
    vs = _pts(vs, pack.dim)
    if _native is not None:
        return _native.added_energy_many(*_explode(pack), pts, vs)
    return reference.added_energy_many(pack, pts, vs)


def rel_activity_many(pack: ModelPack, xs) -> np.ndarray:
    xs = _pts(xs, pack.dim)
    if _native is not None:
        return _native.rel_activity_many(*_explode(pack), xs)
    return reference.rel_activity_many(pack, xs)


def min_pair_distance(pack: ModelPack, pts) -> float:
    pts = _pts(pts, pack.dim)
    if _native is not None:
        return _native.min_pair_distance(*_explode(pack), pts)
    return reference.min_pair_distance(pack, pts)
