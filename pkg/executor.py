"""
Row Executor

Runs data-parallel stage kernels over disjoint row bands on a thread pool.

Contract for every kernel dispatched here:
1. It reads only immutable inputs
2. It writes only the rows (or tile) it was handed
3. Bands never communicate within one dispatch

so output bytes never depend on the worker count or on scheduling. The
compiled kernels release the GIL, which is what makes threads pay off.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, Tuple

from config import BANDS_PER_WORKER, DEFAULT_THREADS

logger = logging.getLogger(__name__)


def row_bands(height: int, bands: int) -> List[Tuple[int, int]]:
    """Split [0, height) into at most `bands` contiguous, near-equal ranges."""
    bands = max(1, min(bands, height))
    step, extra = divmod(height, bands)
    ranges = []
    y0 = 0
    for i in range(bands):
        y1 = y0 + step + (1 if i < extra else 0)
        ranges.append((y0, y1))
        y0 = y1
    return ranges


class RowExecutor:
    """
    Data-parallel executor with a fixed number of workers.

    workers == 1 runs every kernel inline on the calling thread (the serial
    path); more workers dispatch bands to a ThreadPoolExecutor.
    """

    def __init__(self, workers: int = DEFAULT_THREADS):
        if workers < 1:
            raise ValueError(f"Executor needs at least one worker, got {workers}")
        self.workers = workers
        self._pool: Optional[ThreadPoolExecutor] = None
        self._lock = threading.Lock()

    def _get_pool(self) -> ThreadPoolExecutor:
        with self._lock:
            if self._pool is None:
                self._pool = ThreadPoolExecutor(
                    max_workers=self.workers,
                    thread_name_prefix='stereo-worker'
                )
            return self._pool

    def map_rows(self, kernel: Callable[..., Any], height: int, *args) -> None:
        """
        Call kernel(*args, y0, y1) for contiguous bands covering [0, height).

        Waits for every band; the first exception raised by a band is
        re-raised here.
        """
        if self.workers == 1:
            kernel(*args, 0, height)
            return
        bands = row_bands(height, self.workers * BANDS_PER_WORKER)
        self.map_tasks(kernel, [args + band for band in bands])

    def map_tasks(self, fn: Callable[..., Any], tasks: Sequence[Tuple]) -> List[Any]:
        """Run fn(*task) for every task; results come back in task order."""
        if self.workers == 1 or len(tasks) <= 1:
            return [fn(*task) for task in tasks]
        pool = self._get_pool()
        futures = [pool.submit(fn, *task) for task in tasks]
        return [future.result() for future in futures]

    def close(self) -> None:
        with self._lock:
            if self._pool is not None:
                self._pool.shutdown(wait=True)
                self._pool = None

    def __enter__(self) -> 'RowExecutor':
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def __repr__(self) -> str:
        return f"RowExecutor(workers={self.workers})"


_serial_instance: Optional[RowExecutor] = None


def serial() -> RowExecutor:
    """Get the shared single-worker executor"""
    global _serial_instance
    if _serial_instance is None:
        _serial_instance = RowExecutor(1)
    return _serial_instance
