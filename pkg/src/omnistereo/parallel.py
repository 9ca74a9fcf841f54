"""Deterministic row-parallel execution.

Work is split into contiguous row chunks that write disjoint output slices
(or produce per-chunk buffers merged in fixed chunk order), so results are
bit-identical for any worker count. The ``OMNISTEREO_THREADS`` environment
variable supplies the default worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "OMNISTEREO_THREADS"


def worker_count(explicit=None) -> int:
    """Resolve the worker count: explicit argument, then env var, then 1."""
    if explicit is not None:
        n = int(explicit)
    else:
        raw = os.environ.get(ENV_VAR, "")
        try:
            n = int(raw) if raw else 1
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"worker count must be >= 1, got {n}")
    return n


def row_chunks(n_rows: int, workers: int):
    """Split ``range(n_rows)`` into at most ``workers`` contiguous slices."""
    workers = min(max(1, workers), max(1, n_rows))
    bounds = [n_rows * i // workers for i in range(workers + 1)]
    return [slice(bounds[i], bounds[i + 1])
            for i in range(workers) if bounds[i + 1] > bounds[i]]


def map_rows(fn, n_rows: int, workers=None):
    """Run ``fn(row_slice)`` over row chunks; returns results in chunk order.

    ``fn`` must only write to output regions owned by its slice (or return a
    per-chunk value); chunk results are returned in ascending row order
    regardless of completion order.
    """
    n = worker_count(workers)
    chunks = row_chunks(n_rows, n)
    if len(chunks) <= 1:
        return [fn(sl) for sl in chunks]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return list(pool.map(fn, chunks))
