"""Worker-count policy and an order-preserving map."""

import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor

ENV_VAR = "RF_THREADS"


def worker_count() -> int:
    """``RF_THREADS`` if set (minimum 1), otherwise the CPU count."""
    raw = os.environ.get(ENV_VAR)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def pmap(fn, items, processes=True, workers=None):
    """``list(map(fn, items))``, fanned out when more than one worker is allowed.

    Results come back in input order, so callers that give every item its
    own seed stay deterministic regardless of the worker count.
    """
    items = list(items)
    workers = worker_count() if workers is None else workers
    workers = min(workers, len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    pool = ProcessPoolExecutor if processes else ThreadPoolExecutor
    with pool(max_workers=workers) as ex:
        return list(ex.map(fn, items))
