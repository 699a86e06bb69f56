"""Deterministic order-preserving map, optionally threaded.

Per-point work is dominated by LAPACK calls that release the GIL, so threads
give real speedups on grid sweeps while keeping results position-stable.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

JOBS_ENV_VAR = "DIRAC_OBSTRUCTION_JOBS"


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV_VAR, "1")
    try:
        jobs = int(raw)
    except ValueError:
        return 1
    return max(jobs, 1)


def parallel_map(fn: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> list[R]:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
