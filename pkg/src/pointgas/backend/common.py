"""Packed model representation shared by the native and reference kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import geometry as geom
from .. import potential as pot

GEOM_BOX, GEOM_TORUS = 0, 1
POT_ZERO, POT_HARD, POT_STRAUSS, POT_TABLE = 0, 1, 2, 3


@dataclass(frozen=True)
class ModelPack:
    """Flat arrays describing geometry, potential, and activity.

    The activity enters as `act_bound` (the dominating constant intensity)
    plus mask and tilt rows giving the relative value in [0, 1].
    """

    dim: int
    geom_kind: int
    lo: np.ndarray
    hi: np.ndarray
    pot_kind: int
    pot_r: float
    pot_a: float
    tab_r: np.ndarray
    tab_v: np.ndarray
    act_bound: float
    masks: np.ndarray
    tilts: np.ndarray


def make_pack(region, potential, activity=None) -> ModelPack:
    d = geom.dim_of(region)
    if isinstance(region, geom.Torus):
        kind = GEOM_TORUS
        lo = np.zeros(d)
        hi = np.full(d, region.side)
    elif isinstance(region, geom.Box):
        kind = GEOM_BOX
        lo, hi = geom.bounding_box(region)
    else:
        raise ValueError("chains run on box or torus geometries")

    code = pot.kind_code(potential)
    tab_r, tab_v = pot.pack_table(potential)
    pot_a = potential.A if isinstance(potential, pot.Strauss) else 0.0

    if activity is None:
        bound = 0.0
        masks = np.zeros((0, 2 + d + max(d, 2)))
        tilts = np.zeros((0, d + 1))
    else:
        if activity.dim != d:
            raise ValueError("activity dimension mismatch")
        for t in activity.tilts:
            if t.potential != potential:
                raise ValueError("chain kernels require tilts to use the model potential")
        bound = activity.bound
        masks, tilts = activity.compile_rows()

    return ModelPack(
        dim=d,
        geom_kind=kind,
        lo=np.ascontiguousarray(lo, dtype=float),
        hi=np.ascontiguousarray(hi, dtype=float),
        pot_kind=code,
        pot_r=pot.range_of(potential),
        pot_a=float(pot_a),
        tab_r=np.ascontiguousarray(tab_r, dtype=float),
        tab_v=np.ascontiguousarray(tab_v, dtype=float),
        act_bound=float(bound),
        masks=np.ascontiguousarray(masks, dtype=float),
        tilts=np.ascontiguousarray(tilts, dtype=float),
    )
