"""Order-preserving parallel map over a thread pool."""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "UGCRANK_THREADS"


def default_threads() -> int:
    """Worker count from UGCRANK_THREADS, else available parallelism."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    threads: Optional[int] = None,
    desc: str = "",
    show_progress: bool = False,
) -> list[R]:
    """Apply ``fn`` to every item; results come back in input order.

    Exceptions raised by ``fn`` propagate, so callers that need per-item error
    collection wrap ``fn`` themselves.
    """
    items = list(items)
    threads = threads or default_threads()
    bar = tqdm(total=len(items), desc=desc, leave=False, ncols=80, disable=not show_progress)
    try:
        if threads <= 1 or len(items) <= 1:
            results = []
            for item in items:
                results.append(fn(item))
                bar.update(1)
            return results

        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(fn, item) for item in items]
            results = []
            for future in futures:
                results.append(future.result())
                bar.update(1)
            return results
    finally:
        bar.close()
