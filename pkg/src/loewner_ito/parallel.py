"""Order-preserving thread-pool map.

Work is always split into the same chunks whatever the worker count, and
results come back in submission order, so reductions are reproducible.
"""
from concurrent.futures import ThreadPoolExecutor


def map_ordered(fn, items, workers=1):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
