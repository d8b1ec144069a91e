"""Bounded, order-preserving fan-out helpers for backend calls."""
from __future__ import annotations

import threading
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")


class FairSemaphore:
    """Counting semaphore that grants waiters strictly in FIFO order."""

    def __init__(self, permits: int):
        if permits < 1:
            raise ValueError("permits must be >= 1")
        self._lock = threading.Lock()
        self._permits = permits
        self._waiters: deque[threading.Event] = deque()

    def acquire(self) -> None:
        with self._lock:
            if self._permits > 0 and not self._waiters:
                self._permits -= 1
                return
            event = threading.Event()
            self._waiters.append(event)
        event.wait()

    def release(self) -> None:
        with self._lock:
            if self._waiters:
                self._waiters.popleft().set()
            else:
                self._permits += 1

    def __enter__(self) -> "FairSemaphore":
        self.acquire()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.release()


def gather_bounded(
    tasks: Sequence[Callable[[], T]], limit: int
) -> list[T | BaseException]:
    """Run callables with at most ``limit`` in flight.

    Returns one slot per task in input order; a task that raised yields
    its exception instead of a value so callers can degrade per item.
    """
    if not tasks:
        return []
    results: list[T | BaseException] = [None] * len(tasks)  # type: ignore[list-item]

    def _run(index: int) -> None:
        try:
            results[index] = tasks[index]()
        except BaseException as exc:  # noqa: BLE001 - surfaced to caller
            results[index] = exc

    workers = max(1, min(limit, len(tasks)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(_run, range(len(tasks))))
    return results
