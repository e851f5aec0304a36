"""Per-node work scheduling.

DICHOTOMY_THREADS caps the worker count for embarrassingly parallel
per-parameter-node computations; unset or 1 means serial.  The compiled
stepper releases the GIL on its hot loop, so threads give real speedup
for the built-in families.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    raw = os.environ.get("DICHOTOMY_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items):
    """Ordered map over items, threaded when DICHOTOMY_THREADS > 1."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
