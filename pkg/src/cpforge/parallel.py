"""Ordered thread-pool map capped by ``CPFORGE_THREADS``."""
import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "CPFORGE_THREADS"


def thread_count(default=None):
    raw = os.environ.get(ENV_VAR, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
        return n
    return default or min(8, os.cpu_count() or 1)


def ordered_map(fn, items, threads=None):
    """``list(map(fn, items))`` evaluated on a thread pool; order is preserved."""
    items = list(items)
    threads = threads or thread_count()
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
