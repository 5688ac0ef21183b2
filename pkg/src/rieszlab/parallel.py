"""Thread-pool helpers with a deterministic reduction contract.

Work is always split into chunks whose boundaries do not depend on the
thread count; per-chunk results are combined in chunk order.  Serial and
parallel runs are therefore bit-identical.
"""

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import InputError

THREADS_ENV = "RIESZ_THREADS"


def resolve_threads(threads=None) -> int:
    """Number of worker threads: explicit argument, else RIESZ_THREADS
    (0 = auto), else 1."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if raw:
            try:
                threads = int(raw)
            except ValueError as exc:
                raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
        else:
            threads = 1
    if threads < 0:
        raise InputError("thread count must be >= 0")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def map_ordered(fn, items, threads=None):
    """Apply fn to each item; results are returned in item order no
    matter how many threads execute the work."""
    threads = resolve_threads(threads)
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunk_ranges(n: int, chunk: int):
    """Fixed [start, stop) row ranges; independent of thread count."""
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
