"""Deterministic stream derivation for parallel Monte Carlo.

Every source of randomness in the package is a counter-based Philox stream
keyed by (master seed, purpose, chain index, step index).  Streams never
depend on scheduling, so results are identical for any thread count, and a
chain advanced step by step consumes exactly the same numbers as a chain
advanced in one call.
"""

from __future__ import annotations

import hashlib

import numpy as np

# Mixed into every Philox key so package streams cannot collide with other
# users of the same master seed.
DOMAIN = 0x706F696E74676173  # "pointgas"

MASK64 = (1 << 64) - 1


def purpose_id(purpose: str) -> int:
    """Stable 64-bit id for a purpose label."""
    digest = hashlib.blake2b(purpose.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _u64(values) -> np.ndarray:
    # a plain list would round through float64 for values >= 2^63
    return np.array([v & MASK64 for v in values], dtype=np.uint64)


def philox_bitgen(seed: int, purpose: str, chain: int = 0, step: int = 0) -> np.random.Philox:
    """Philox bit generator positioned at the start of the requested stream."""
    counter = _u64([0, step, chain, purpose_id(purpose)])
    return np.random.Philox(counter=counter, key=_u64([seed, DOMAIN]))


def generator(seed: int, purpose: str, chain: int = 0, step: int = 0) -> np.random.Generator:
    """NumPy Generator over the stream (for non-chain sampling work)."""
    return np.random.Generator(philox_bitgen(seed, purpose, chain, step))


class Uniforms:
    """Sequential u64 -> [0,1) draws from one stream.

    The i-th draw is word i%4 of the Philox block with counter
    (i//4 + 1, step, chain, purpose); the native kernel reproduces the
    same sequence bit for bit.
    """

    def __init__(self, seed: int, purpose: str, chain: int = 0, step: int = 0,
                 _pid: int | None = None):
        pid = purpose_id(purpose) if _pid is None else _pid
        counter = _u64([0, step, chain, pid])
        self._bg = np.random.Philox(counter=counter, key=_u64([seed, DOMAIN]))
        self._buf: np.ndarray = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def next_u64(self) -> int:
        if self._pos >= self._buf.size:
            self._buf = self._bg.random_raw(128)
            self._pos = 0
        x = int(self._buf[self._pos])
        self._pos += 1
        return x

    def u01(self) -> float:
        return (self.next_u64() >> 11) * (2.0 ** -53)
