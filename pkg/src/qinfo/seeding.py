"""Seed handling and deterministic parallel trial execution."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

T = TypeVar("T")


def make_rng(seed) -> np.random.Generator:
    """Accept an int seed, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one trial, derived from ``(seed, index)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)]))


def worker_count() -> int:
    raw = os.environ.get("QINFO_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError("QINFO_THREADS must be a positive integer") from exc
    if n < 1:
        raise ValueError("QINFO_THREADS must be a positive integer")
    return n


def map_trials(fn: Callable[[int], T], indices: Iterable[int]) -> list[T]:
    """Run ``fn`` over trial indices; the result order never depends on workers."""
    indices = list(indices)
    workers = worker_count()
    if workers == 1 or len(indices) < 2:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices))
