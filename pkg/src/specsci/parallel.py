"""Deterministic block-parallel evaluation over grid points."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "SPECSCI_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    if raw == "auto":
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_blocks(fn, zs: np.ndarray, threads: int | None = None, block: int = 4096):
    """Apply fn to contiguous blocks of zs and concatenate the per-block tuples
    of arrays in grid order. Each point's result must not depend on its block,
    which keeps output identical for any thread count."""
    threads = default_threads() if threads is None else max(1, int(threads))
    zs = np.asarray(zs)
    pieces = [zs[i : i + block] for i in range(0, zs.size, block)] or [zs]
    if threads == 1 or len(pieces) == 1:
        results = [fn(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(fn, pieces))
    return tuple(np.concatenate([r[i] for r in results]) for i in range(len(results[0])))
