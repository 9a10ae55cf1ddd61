"""Deterministic fan-out of independent grid tasks over worker processes.

Results always come back in input order, so reductions over them do not
depend on the worker count or on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

# below this many tasks the process start-up cost dominates
MIN_PARALLEL_TASKS = 64


def _run_chunk(fn: Callable, chunk: Sequence):
    return [fn(item) for item in chunk]


def chunked(items: Sequence[T], n: int) -> list[Sequence[T]]:
    size = max(1, -(-len(items) // n))
    return [items[i:i + size] for i in range(0, len(items), size)]


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """``[fn(x) for x in items]``, optionally spread across processes."""
    items = list(items)
    workers = max(1, int(workers or 1))
    if workers == 1 or len(items) < MIN_PARALLEL_TASKS:
        return [fn(x) for x in items]
    workers = min(workers, os.cpu_count() or 1, len(items)) or 1
    chunks = chunked(items, workers * 4)
    out: list[R] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_run_chunk, [fn] * len(chunks), chunks):
            out.extend(part)
    return out
