"""
Conversion Pipeline

Runs the fixed stage order depth -> filter -> DIBR -> inpaint -> format over
a RowExecutor and times every stage on a monotonic clock.

"Pure" time is filter + DIBR + inpaint (left and right) + format. Depth
generation (serial path) and all decode/encode/disk time are excluded.
"""

import csv
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, TextIO, Tuple

from depthgen import generate_depth
from dibr import StereoFrames, reconstruct
from executor import RowExecutor, serial
from imgcore import (
    ConversionConfig, DamageMask, DecodeError, GrayMap, ImageRGB8, decode_ppm,
    encode_ppm, encode_pgm, luma
)
from inpaint import InpaintStats, inpaint_with_stats
from stereofmt import format_pair
from xbfilter import cross_bilateral

logger = logging.getLogger(__name__)

STAGE_COLUMNS = (
    'depth_ns', 'filter_ns', 'dibr_ns', 'inpaint_l_ns', 'inpaint_r_ns', 'format_ns', 'pure_ns'
)
FRAME_CSV_HEADER = ('index',) + STAGE_COLUMNS + ('io_ns',)


# ============================================================================
# Single-frame conversion
# ============================================================================

@dataclass(frozen=True)
class StageTimings:
    """Per-stage wall time in nanoseconds"""
    depth_gen_ns: int = 0
    filter_ns: int = 0
    dibr_ns: int = 0
    inpaint_left_ns: int = 0
    inpaint_right_ns: int = 0
    format_ns: int = 0

    @property
    def pure_ns(self) -> int:
        return (self.filter_ns + self.dibr_ns + self.inpaint_left_ns
                + self.inpaint_right_ns + self.format_ns)

    def as_row(self) -> Tuple[int, ...]:
        """Values in STAGE_COLUMNS order"""
        return (self.depth_gen_ns, self.filter_ns, self.dibr_ns, self.inpaint_left_ns,
                self.inpaint_right_ns, self.format_ns, self.pure_ns)


@dataclass(frozen=True)
class ConversionResult:
    outputs: Dict[str, ImageRGB8]
    depth: GrayMap
    filtered_depth: GrayMap
    timings: StageTimings
    stereo: StereoFrames  # eyes after inpainting
    inpaint_stats: Tuple[InpaintStats, InpaintStats] = (InpaintStats(), InpaintStats())


def _inpaint_eye(frame: ImageRGB8, mask: DamageMask, cfg: ConversionConfig,
                 executor: RowExecutor) -> Tuple[ImageRGB8, InpaintStats, int]:
    if not mask.any():
        return frame, InpaintStats(), 0
    start = time.perf_counter_ns()
    repaired, stats = inpaint_with_stats(frame, mask, cfg, executor)
    return repaired, stats, time.perf_counter_ns() - start


def convert_image(src: ImageRGB8, cfg: ConversionConfig,
                  executor: Optional[RowExecutor] = None) -> ConversionResult:
    """
    Convert one frame into every output format requested by cfg.

    Output bytes are identical for every executor width.
    """
    executor = executor or serial()

    start = time.perf_counter_ns()
    depth = generate_depth(src, cfg)
    depth_ns = time.perf_counter_ns() - start

    start = time.perf_counter_ns()
    filtered = cross_bilateral(depth, luma(src), cfg, executor)
    filter_ns = time.perf_counter_ns() - start

    start = time.perf_counter_ns()
    frames = reconstruct(src, filtered, cfg, executor)
    dibr_ns = time.perf_counter_ns() - start

    left, left_stats, inpaint_left_ns = _inpaint_eye(frames.left, frames.left_mask, cfg, executor)
    right, right_stats, inpaint_right_ns = _inpaint_eye(frames.right, frames.right_mask, cfg, executor)

    start = time.perf_counter_ns()
    outputs = {
        fmt.value: format_pair(left, right, fmt, executor)
        for fmt in cfg.output_formats
    }
    format_ns = time.perf_counter_ns() - start

    timings = StageTimings(
        depth_gen_ns=depth_ns,
        filter_ns=filter_ns,
        dibr_ns=dibr_ns,
        inpaint_left_ns=inpaint_left_ns,
        inpaint_right_ns=inpaint_right_ns,
        format_ns=format_ns
    )
    logger.debug("Converted %r with %r: pure %d ns", src, executor, timings.pure_ns)

    clear = DamageMask.clear(src.width, src.height)
    return ConversionResult(
        outputs=outputs,
        depth=depth,
        filtered_depth=filtered,
        timings=timings,
        stereo=StereoFrames(left, right, clear, clear),
        inpaint_stats=(left_stats, right_stats)
    )


# ============================================================================
# Frame sequences
# ============================================================================

class FrameRef(NamedTuple):
    index: int
    path: str


class NumberedFrames:
    """
    Frames named by a printf pattern such as 'frame_%06d.ppm'.

    Enumeration starts at `start` (auto: 0 if that file exists, else 1) and
    stops at the first missing index, so ordering never depends on the
    filesystem.
    """

    def __init__(self, directory: str, pattern: str, start: Optional[int] = None):
        try:
            pattern % 0
        except (TypeError, ValueError):
            raise ValueError(f"Frame pattern needs one integer placeholder: {pattern!r}")
        self.directory = directory
        self.pattern = pattern
        self.start = start

    def path_for(self, index: int) -> str:
        return os.path.join(self.directory, self.pattern % index)

    def __iter__(self) -> Iterator[FrameRef]:
        index = self.start
        if index is None:
            index = 0 if os.path.exists(self.path_for(0)) else 1
        while os.path.exists(self.path_for(index)):
            yield FrameRef(index, self.path_for(index))
            index += 1


class DirectorySink:
    """Writes <stem>_<format>.ppm (and optionally <stem>_depth.pgm) per frame."""

    def __init__(self, directory: str, pattern: str, emit_depth: bool = False):
        self.directory = directory
        self.pattern = pattern
        self.emit_depth = emit_depth
        os.makedirs(directory, exist_ok=True)

    def stem(self, index: int) -> str:
        return os.path.splitext(os.path.basename(self.pattern % index))[0]

    def write(self, index: int, result: ConversionResult) -> List[str]:
        stem = self.stem(index)
        payloads = [
            (f"{stem}_{name}.ppm", encode_ppm(img))
            for name, img in result.outputs.items()
        ]
        if self.emit_depth:
            payloads.append((f"{stem}_depth.pgm", encode_pgm(result.depth)))

        written = []
        for name, payload in payloads:
            path = os.path.join(self.directory, name)
            with open(path, 'wb') as f:
                f.write(payload)
            written.append(path)
        return written


@dataclass(frozen=True)
class FrameRecord:
    index: int
    timings: StageTimings
    io_ns: int  # read + decode + encode + write


@dataclass
class SequenceReport:
    frames: List[FrameRecord] = field(default_factory=list)
    written: List[str] = field(default_factory=list)
    wall_ns: int = 0

    @property
    def count(self) -> int:
        return len(self.frames)

    @property
    def pure_sum_ns(self) -> int:
        return sum(f.timings.pure_ns for f in self.frames)

    @property
    def pure_mean_ns(self) -> float:
        return self.pure_sum_ns / self.count if self.frames else 0.0

    @property
    def pure_min_ns(self) -> int:
        return min((f.timings.pure_ns for f in self.frames), default=0)

    @property
    def pure_max_ns(self) -> int:
        return max((f.timings.pure_ns for f in self.frames), default=0)

    @property
    def io_ns(self) -> int:
        return sum(f.io_ns for f in self.frames)

    @property
    def compute_share(self) -> float:
        """Fraction of wall time spent in pure computation"""
        return self.pure_sum_ns / self.wall_ns if self.wall_ns else 0.0

    def summary_line(self) -> str:
        return (
            f"frames={self.count} pure_sum_ns={self.pure_sum_ns} "
            f"pure_mean_ns={self.pure_mean_ns:.0f} pure_min_ns={self.pure_min_ns} "
            f"pure_max_ns={self.pure_max_ns} io_ns={self.io_ns} wall_ns={self.wall_ns} "
            f"compute_share={self.compute_share:.3f}"
        )


class SequenceAbortedError(DecodeError):
    """A frame could not be decoded; earlier outputs stay on disk."""

    def __init__(self, index: int, report: SequenceReport, cause: Exception):
        super().__init__(f"Frame {index} could not be decoded: {cause}")
        self.index = index
        self.report = report


def convert_sequence(frames: Iterable[FrameRef], cfg: ConversionConfig,
                     executor: Optional[RowExecutor], sink) -> SequenceReport:
    """
    Convert every frame in order and hand the results to sink.

    Raises:
        SequenceAbortedError: on the first undecodable frame
    """
    executor = executor or serial()
    report = SequenceReport()
    sequence_start = time.perf_counter_ns()

    for ref in frames:
        io_start = time.perf_counter_ns()
        with open(ref.path, 'rb') as f:
            payload = f.read()
        try:
            src = decode_ppm(payload)
        except DecodeError as e:
            report.wall_ns = time.perf_counter_ns() - sequence_start
            logger.error("Aborting sequence at frame %d (%s)", ref.index, ref.path)
            raise SequenceAbortedError(ref.index, report, e) from e
        io_ns = time.perf_counter_ns() - io_start

        result = convert_image(src, cfg, executor)

        io_start = time.perf_counter_ns()
        report.written.extend(sink.write(ref.index, result))
        io_ns += time.perf_counter_ns() - io_start

        report.frames.append(FrameRecord(ref.index, result.timings, io_ns))
        logger.info("Frame %d converted: pure %.1f ms", ref.index, result.timings.pure_ns / 1e6)

    report.wall_ns = time.perf_counter_ns() - sequence_start
    return report


def write_timing_csv(report: SequenceReport, stream: TextIO) -> None:
    """One row per frame, LF line endings."""
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(FRAME_CSV_HEADER)
    for frame in report.frames:
        writer.writerow((frame.index,) + frame.timings.as_row() + (frame.io_ns,))
