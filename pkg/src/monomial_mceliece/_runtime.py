"""Worker pools and per-chunk random streams for Monte-Carlo campaigns."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

THREADS_ENV = "MONOMIAL_MCELIECE_THREADS"


def worker_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def base_seed(rng_or_seed) -> int:
    """Integer root seed; a Generator contributes one draw."""
    if isinstance(rng_or_seed, np.random.Generator):
        return int(rng_or_seed.integers(0, 2**63 - 1))
    if rng_or_seed is None:
        raise ValueError("experiments need an explicit seed")
    return int(rng_or_seed)


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Stream for chunk ``index``; independent of which worker runs it."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def chunk_sizes(total: int, chunk: int) -> list[int]:
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn: Callable[[int, int, np.random.Generator], T], total: int,
               chunk: int, seed: int) -> list[T]:
    """Run ``fn(index, size, rng)`` on every chunk; results in chunk order."""
    sizes = chunk_sizes(total, chunk)
    jobs = [(i, n, chunk_rng(seed, i)) for i, n in enumerate(sizes)]
    workers = worker_count()
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def random_errors(rng: np.random.Generator, count: int, n: int, t: int) -> np.ndarray:
    """``count`` uniformly random weight-t rows of length n (uint8)."""
    if not 0 <= t <= n:
        raise ValueError(f"error weight {t} outside [0, {n}]")
    out = np.zeros((count, n), dtype=np.uint8)
    if t == 0 or count == 0:
        return out
    if t == n:
        out[:] = 1
        return out
    pos = np.argpartition(rng.random((count, n)), t, axis=1)[:, :t]
    np.put_along_axis(out, pos, 1, axis=1)
    return out
