"""Seeding contract shared by every Monte Carlo routine.

A task identified by a tuple of non-negative integers ``key`` draws from

    numpy.random.Generator(PCG64(SeedSequence(base_seed, spawn_key=key)))

so its stream depends only on ``(base_seed, key)``.  No state is carried
between tasks, which makes results independent of execution order and of
the number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "DEPCOV_THREADS"


def substream(base_seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(base_seed, *key)))


def seed_sequence(base_seed: int, *key: int) -> np.random.SeedSequence:
    if base_seed < 0 or any(k < 0 for k in key):
        raise ValueError("seeds and substream keys must be non-negative")
    return np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))


def derived_seed(base_seed: int, *key: int) -> int:
    """A 63-bit integer seed for nested routines that take ``base_seed``."""
    state = seed_sequence(base_seed, *key).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))


def resolve_threads(threads: int | None) -> int:
    """Explicit value, else ``DEPCOV_THREADS``, else the CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = 1) -> list[R]:
    """``[fn(i) for i in items]``, optionally on a thread pool.

    Results keep input order, so aggregation never sees completion order.
    """
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def as_generator(seed: int | np.random.Generator | np.random.SeedSequence | Sequence[int]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
