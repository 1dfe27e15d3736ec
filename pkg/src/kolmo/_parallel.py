import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    """Thread cap from KOLMO_THREADS (default 1, i.e. serial)."""
    raw = os.environ.get("KOLMO_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """map() that may run on threads; results keep the input order."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
