"""Replication-level parallelism.

Work units are independent and draw from their own random streams, and
results are returned in input order, so output never depends on the
number of threads.  The compiled solver releases the GIL, which is what
makes threads worthwhile here.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "RLPCI_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn, items, threads: int | None = None, tolerate: bool = False) -> list:
    """Ordered map; with ``tolerate`` a raised exception is returned in place of the result."""
    threads = threads or default_threads()
    items = list(items)

    def call(x):
        if not tolerate:
            return fn(x)
        try:
            return fn(x)
        except Exception as exc:  # noqa: BLE001 - reported per replication by callers
            return exc

    if threads == 1 or len(items) <= 1:
        return [call(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(call, items))
