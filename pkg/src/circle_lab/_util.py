"""Seed splitting and worker-pool plumbing shared across the package."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def substream(seed: int, *key: int) -> np.random.Generator:
    """Child generator for task `key` under the global `seed`.

    Splitting rule: ``SeedSequence(entropy=seed, spawn_key=key)``.  The
    stream depends only on (seed, key), never on scheduling order, so
    parallel scans reproduce serial runs bit for bit.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.default_rng(ss)


def resolve_threads(requested: int | None = None) -> int:
    """Worker count: CIRCLE_LAB_THREADS env var wins, then `requested`,
    then available parallelism."""
    env = os.environ.get("CIRCLE_LAB_THREADS")
    if env:
        return max(1, int(env))
    if requested is not None:
        return max(1, int(requested))
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """Map preserving input order; results are merged by position, not by
    completion, so thread count cannot change any output."""
    work: Sequence[T] = list(items)
    n = resolve_threads(threads)
    if n <= 1 or len(work) <= 1:
        return [fn(x) for x in work]
    with ThreadPoolExecutor(max_workers=min(n, len(work))) as pool:
        return list(pool.map(fn, work))
