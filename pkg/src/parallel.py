"""
Deterministic seed derivation and ordered thread-pool fan-out.

Monte Carlo work is split into fixed-size chunks whose seeds depend only on
(seed, chunk index), so results do not depend on how many workers run them.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Iterable, List, Sequence, Tuple, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def derive_seed(seed: int, *keys: int) -> int:
    """Derive an independent 64-bit seed from a root seed and a key path."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def chunk_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys)))


def chunk_ranges(total: int, chunk_size: int) -> List[Tuple[int, int, int]]:
    """Return (index, start, stop) for fixed-size chunks covering range(total)."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    return [(i, start, min(start + chunk_size, total))
            for i, start in enumerate(range(0, total, chunk_size))]


def ordered_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], workers: int = 1) -> List[R]:
    """
    Apply fn to every item, using up to `workers` threads.

    Results come back in submission order regardless of completion order.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    results: List[R] = [None] * len(items)  # type: ignore[list-item]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as ex:
        future_map = {ex.submit(fn, item): idx for idx, item in enumerate(items)}
        for fut in as_completed(future_map):
            idx = future_map[fut]
            results[idx] = fut.result()
    return results
