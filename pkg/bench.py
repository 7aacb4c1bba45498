"""
Benchmark Harness

Serial-vs-parallel timing of the conversion pipeline on synthetic frames.
Only pure time (filter + DIBR + inpaint + format) enters the speedup;
depth generation and I/O are recorded but excluded.

    speedup(t) = median pure_ns at 1 thread / median pure_ns at t threads
"""

import csv
import logging
import statistics
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, TextIO, Tuple

import numpy as np
import psutil

from config import BENCH_SEED, TARGET_FPS
from executor import RowExecutor
from imgcore import ConfigError, ConversionConfig, ImageRGB8
from pipeline import STAGE_COLUMNS, StageTimings, convert_image

logger = logging.getLogger(__name__)

BENCH_CSV_HEADER = ('width', 'height', 'threads', 'rep') + STAGE_COLUMNS
MIN_REPS = 3


def physical_cores() -> int:
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


def synthetic_frame(width: int, height: int, seed: int = BENCH_SEED) -> ImageRGB8:
    """
    Deterministic test frame: diagonal gradient plus seeded RGB noise and a
    bright block, so both the edge and the ramp depth cues have content.
    """
    rng = np.random.default_rng(seed)
    noise = rng.integers(0, 64, size=(3, height, width), dtype=np.int64)
    ramp_y = np.linspace(0.0, 160.0, height)[:, None]
    ramp_x = np.linspace(0.0, 32.0, width)[None, :]
    gradient = np.floor(ramp_y + ramp_x).astype(np.int64)

    data = gradient[None, :, :] + noise
    data[1] += 16
    y0, y1 = height // 3, (2 * height) // 3
    x0, x1 = width // 3, (2 * width) // 3
    data[:, y0:y1, x0:x1] += 48
    return ImageRGB8(np.clip(data, 0, 255).astype(np.uint8))


class BenchRow(NamedTuple):
    width: int
    height: int
    threads: int
    rep: int
    timings: StageTimings


@dataclass(frozen=True)
class BenchSummary:
    width: int
    height: int
    threads: int
    median_pure_ns: float
    speedup: float
    fps: float
    realtime: bool


@dataclass
class BenchReport:
    rows: List[BenchRow] = field(default_factory=list)
    target_fps: float = TARGET_FPS

    def sizes(self) -> List[Tuple[int, int]]:
        return list(dict.fromkeys((r.width, r.height) for r in self.rows))

    def thread_counts(self) -> List[int]:
        return list(dict.fromkeys(r.threads for r in self.rows))

    def median_pure_ns(self, width: int, height: int, threads: int) -> float:
        samples = [
            r.timings.pure_ns for r in self.rows
            if (r.width, r.height, r.threads) == (width, height, threads)
        ]
        if not samples:
            raise KeyError(f"No bench rows for {width}x{height} at {threads} threads")
        return float(statistics.median(samples))

    def speedup(self, width: int, height: int, threads: int) -> float:
        if threads == 1:
            return 1.0
        parallel = self.median_pure_ns(width, height, threads)
        baseline = self.median_pure_ns(width, height, 1)
        return baseline / parallel if parallel else float('inf')

    def summary(self) -> List[BenchSummary]:
        entries = []
        for width, height in self.sizes():
            for threads in self.thread_counts():
                median = self.median_pure_ns(width, height, threads)
                fps = 1e9 / median if median else float('inf')
                entries.append(BenchSummary(
                    width=width,
                    height=height,
                    threads=threads,
                    median_pure_ns=median,
                    speedup=self.speedup(width, height, threads),
                    fps=fps,
                    realtime=fps >= self.target_fps
                ))
        return entries

    def write_csv(self, stream: TextIO) -> None:
        """One row per repetition, LF line endings."""
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(BENCH_CSV_HEADER)
        for row in self.rows:
            writer.writerow((row.width, row.height, row.threads, row.rep) + row.timings.as_row())

    def write_summary(self, stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(('width', 'height', 'threads', 'median_pure_ns', 'speedup', 'fps', 'realtime'))
        for s in self.summary():
            writer.writerow((s.width, s.height, s.threads, f"{s.median_pure_ns:.0f}",
                             f"{s.speedup:.3f}", f"{s.fps:.3f}", int(s.realtime)))


def bench(sizes: Sequence[Tuple[int, int]], thread_counts: Sequence[int], reps: int,
          cfg: ConversionConfig, seed: int = BENCH_SEED,
          target_fps: Optional[float] = None) -> BenchReport:
    """
    Time convert_image reps times per (size, thread count).

    The 1-thread baseline is always measured so speedup(1) = 1.0.
    """
    if reps < MIN_REPS:
        raise ConfigError(f"bench needs at least {MIN_REPS} repetitions, got {reps}")
    threads = list(dict.fromkeys(thread_counts))
    if any(t < 1 for t in threads):
        raise ConfigError(f"thread counts must be >= 1, got {threads}")
    if 1 not in threads:
        logger.warning("Adding the 1-thread baseline to thread counts %s", threads)
    threads = [1] + [t for t in threads if t != 1]

    logger.info("Bench host: %d physical / %d logical cores",
                physical_cores(), psutil.cpu_count() or 0)

    # keeps kernel compilation out of every measured repetition
    convert_image(synthetic_frame(32, 32, seed), cfg, RowExecutor(1))

    report = BenchReport(target_fps=TARGET_FPS if target_fps is None else target_fps)
    for width, height in sizes:
        frame = synthetic_frame(width, height, seed)
        for count in threads:
            with RowExecutor(count) as executor:
                for rep in range(reps):
                    result = convert_image(frame, cfg, executor)
                    report.rows.append(BenchRow(width, height, count, rep, result.timings))
            logger.info("%dx%d threads=%d median pure %.1f ms", width, height, count,
                        report.median_pure_ns(width, height, count) / 1e6)
    return report
