"""Deterministic fan-out over independent Monte Carlo units.

Work is keyed by index, every index owns its own RNG stream, and results
are merged in index order, so the thread count changes wall time only.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, n: int, threads: int = 1) -> list:
    if threads is None or threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=min(threads, n)) as ex:
        return list(ex.map(fn, range(n)))
