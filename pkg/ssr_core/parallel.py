# ssr_core/parallel.py
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

import numpy as np

from .config_util import thread_count

T = TypeVar("T")
R = TypeVar("R")


def spawn_seeds(root, n: int) -> List[np.random.SeedSequence]:
    """Independent child seeds; trial i always gets the same child for a given root."""
    return np.random.SeedSequence(root).spawn(n)


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    items = list(items)
    workers = min(thread_count(), max(1, len(items)))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
