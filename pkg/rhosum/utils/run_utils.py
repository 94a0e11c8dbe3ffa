# -*- coding: utf-8 -*-
"""Utility functions to run work in parallel and under a time budget."""
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from rhosum.errors import ResourceLimit

T = TypeVar("T")
R = TypeVar("R")

"""Environment variable capping internal parallelism."""
THREADS_VARIABLE = "RHOSUM_THREADS"


def thread_count() -> int:
    """Number of worker threads: RHOSUM_THREADS if set and valid, else the cpu count."""
    value = os.environ.get(THREADS_VARIABLE, "")
    try:
        count = int(value)
    except ValueError:
        if value:
            logging.warning("Ignoring invalid %s=%r", THREADS_VARIABLE, value)
        count = os.cpu_count() or 1
    return max(1, count)


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Apply ``func`` to all items, in order, on a thread pool of at most ``threads`` workers.

    The first exception raised by ``func`` is re-raised in the caller.
    """
    items = list(items)
    threads = min(threads or thread_count(), len(items))
    if threads <= 1:
        return [func(item) for item in items]
    logging.debug("running %d tasks on %d threads", len(items), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


class Deadline:
    """Cooperative time budget; ``check`` raises ResourceLimit once it has passed."""

    def __init__(self, seconds: Optional[float], clock: Callable[[], float] = time.monotonic):
        self.seconds = seconds
        self.clock = clock
        self.started = clock()

    @property
    def elapsed(self) -> float:
        return self.clock() - self.started

    def remaining(self) -> Optional[float]:
        if self.seconds is None:
            return None
        return self.seconds - self.elapsed

    def check(self, what: str = ""):
        remaining = self.remaining()
        if remaining is not None and remaining < 0:
            logging.warning("Timeout hit while running %s", what or "the computation")
            raise ResourceLimit(f"time budget of {self.seconds:g} s exhausted{' in ' + what if what else ''}")
