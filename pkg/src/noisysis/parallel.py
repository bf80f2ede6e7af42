"""Order-preserving fan-out over worker processes.

The worker count comes from ``NSIS_WORKERS`` (default 1, i.e. in-process).
Results are always returned in submission order, so aggregates do not
depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("NSIS_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"NSIS_WORKERS must be an integer, got {raw!r}") from None


def map_ordered(fn, items, workers: int | None = None) -> list:
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
