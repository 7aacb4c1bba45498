#!/usr/bin/env python3
"""
Command-Line Front End

Subcommands:
    convert  one PPM frame into anaglyph / HSBS / FSBS outputs
    depth    depth map only, as PGM
    video    numbered PPM frame sequence
    bench    serial-vs-parallel timing on synthetic frames

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 decode error.
Diagnostics go to stderr; data and CSV go to files or stdout.
"""

import argparse
import logging
import os
import sys
from contextlib import contextmanager
from typing import List, Optional, Sequence, Tuple

from bench import bench, physical_cores
from config import BENCH_REPS, BENCH_SEED, DEFAULT_THREADS, setup_logging
from depthgen import generate_depth
from executor import RowExecutor
from imgcore import (
    ConfigError, ConversionConfig, DecodeError, DibrMode, FormatError,
    parse_formats, read_ppm, write_pgm, write_ppm
)
from pipeline import (
    DirectorySink, NumberedFrames, SequenceAbortedError, convert_image,
    convert_sequence, write_timing_csv
)

logger = logging.getLogger('cli')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DECODE = 3


class UsageError(Exception):
    """Bad command line"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ============================================================================
# Argument parsing
# ============================================================================

def _size_list(text: str) -> List[Tuple[int, int]]:
    sizes = []
    for item in text.split(','):
        try:
            width, height = item.lower().split('x')
            sizes.append((int(width), int(height)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad size {item!r}, expected WxH")
        if sizes[-1][0] < 1 or sizes[-1][1] < 1:
            raise argparse.ArgumentTypeError(f"bad size {item!r}")
    return sizes


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}")


def _shared_options() -> argparse.ArgumentParser:
    parent = _Parser(add_help=False)
    group = parent.add_argument_group('conversion')
    group.add_argument('--base', type=int, default=None,
                       help='stereo base in pixels (even; default 2*round(width/256))')
    group.add_argument('--pop-threshold', type=int, default=None)
    group.add_argument('--sigma-spatial', type=float, default=None)
    group.add_argument('--sigma-range', type=float, default=None)
    group.add_argument('--depth-block', type=int, default=None)
    group.add_argument('--inpaint-block', type=int, default=None)
    group.add_argument('--alpha', type=float, default=None)
    group.add_argument('--beta', type=float, default=None)
    group.add_argument('--mode', choices=['forward', 'backward'], default='forward')
    group.add_argument('--format', dest='formats', action='append',
                       choices=['anaglyph', 'hsbs', 'fsbs'],
                       help='output format (repeatable; default anaglyph)')
    parent.add_argument('--log-level', type=str.upper, default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'])
    return parent


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_options()
    parser = _Parser(prog='stereo3d', description='2D to 3D pseudo-stereo conversion')
    commands = parser.add_subparsers(dest='command', parser_class=_Parser)
    commands.required = True

    convert = commands.add_parser('convert', parents=[shared], help='convert one frame')
    convert.add_argument('input')
    convert.add_argument('--out', required=True, help='output directory')
    convert.add_argument('--emit-depth', action='store_true')
    convert.add_argument('--emit-filtered-depth', action='store_true')
    convert.add_argument('--emit-eyes', action='store_true')
    convert.add_argument('--threads', type=int, default=DEFAULT_THREADS)

    depth = commands.add_parser('depth', parents=[shared], help='export the depth map')
    depth.add_argument('input')
    depth.add_argument('--out', required=True, help='output PGM file')
    depth.add_argument('--threads', type=int, default=DEFAULT_THREADS,
                       help='accepted for symmetry; depth runs on the serial path')

    video = commands.add_parser('video', parents=[shared], help='convert a frame sequence')
    video.add_argument('--in', dest='in_dir', required=True)
    video.add_argument('--pattern', default='frame_%06d.ppm')
    video.add_argument('--start', type=int, default=None)
    video.add_argument('--out', required=True)
    video.add_argument('--timing-csv', default=None)
    video.add_argument('--emit-depth', action='store_true')
    video.add_argument('--threads', type=int, default=DEFAULT_THREADS)

    bench_cmd = commands.add_parser('bench', parents=[shared], help='serial vs parallel timing')
    bench_cmd.add_argument('--sizes', type=_size_list, default=[(1920, 1080), (3840, 2160)])
    bench_cmd.add_argument('--threads', type=_int_list, default=None,
                           help='comma-separated thread counts (default 1,<physical cores>)')
    bench_cmd.add_argument('--reps', type=int, default=BENCH_REPS)
    bench_cmd.add_argument('--csv', default='-', help="CSV file, '-' for stdout")
    bench_cmd.add_argument('--seed', type=int, default=BENCH_SEED)
    bench_cmd.add_argument('--summary', action='store_true',
                           help='also print the speedup table to stdout')
    return parser


def config_from_args(args) -> ConversionConfig:
    overrides = {
        'base': args.base,
        'pop_threshold': args.pop_threshold,
        'sigma_spatial': args.sigma_spatial,
        'sigma_range': args.sigma_range,
        'depth_block': args.depth_block,
        'inpaint_block': args.inpaint_block,
        'alpha': args.alpha,
        'beta': args.beta,
    }
    settings = {key: value for key, value in overrides.items() if value is not None}
    settings['base'] = args.base
    settings['dibr_mode'] = DibrMode.parse(args.mode)
    settings['output_formats'] = parse_formats(args.formats or ['anaglyph'])
    return ConversionConfig(**settings)


def _check_threads(threads: int) -> None:
    if threads < 1:
        raise UsageError(f"--threads must be >= 1, got {threads}")


@contextmanager
def _open_text_output(target: str):
    if target == '-':
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(target, 'w', newline='') as f:
            yield f


# ============================================================================
# Subcommands
# ============================================================================

def cmd_convert(args) -> int:
    cfg = config_from_args(args)
    _check_threads(args.threads)
    src = read_ppm(args.input)
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.input))[0]

    with RowExecutor(args.threads) as executor:
        result = convert_image(src, cfg, executor)

    for name, img in result.outputs.items():
        write_ppm(os.path.join(args.out, f"{stem}_{name}.ppm"), img)
    if args.emit_depth:
        write_pgm(os.path.join(args.out, f"{stem}_depth.pgm"), result.depth)
    if args.emit_filtered_depth:
        write_pgm(os.path.join(args.out, f"{stem}_depth_filtered.pgm"), result.filtered_depth)
    if args.emit_eyes:
        write_ppm(os.path.join(args.out, f"{stem}_left.ppm"), result.stereo.left)
        write_ppm(os.path.join(args.out, f"{stem}_right.ppm"), result.stereo.right)

    logger.info("Converted %s: pure %.1f ms, depth %.1f ms", args.input,
                result.timings.pure_ns / 1e6, result.timings.depth_gen_ns / 1e6)
    return EXIT_OK


def cmd_depth(args) -> int:
    cfg = config_from_args(args)
    _check_threads(args.threads)
    src = read_ppm(args.input)
    write_pgm(args.out, generate_depth(src, cfg))
    return EXIT_OK


def cmd_video(args) -> int:
    cfg = config_from_args(args)
    _check_threads(args.threads)
    if not os.path.isdir(args.in_dir):
        raise FileNotFoundError(f"Input directory not found: {args.in_dir}")
    try:
        frames = NumberedFrames(args.in_dir, args.pattern, args.start)
    except ValueError as e:
        raise UsageError(str(e))
    sink = DirectorySink(args.out, args.pattern, emit_depth=args.emit_depth)

    with RowExecutor(args.threads) as executor:
        try:
            report = convert_sequence(frames, cfg, executor, sink)
        except SequenceAbortedError as e:
            logger.error("%d frames converted, %d files written before the failure",
                         e.report.count, len(e.report.written))
            raise

    if report.count == 0:
        logger.warning("No frames matched %s in %s", args.pattern, args.in_dir)
    if args.timing_csv:
        with _open_text_output(args.timing_csv) as stream:
            write_timing_csv(report, stream)
    print(report.summary_line())
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = config_from_args(args)
    threads = args.threads or [1, physical_cores()]
    report = bench(args.sizes, threads, args.reps, cfg, seed=args.seed)
    with _open_text_output(args.csv) as stream:
        report.write_csv(stream)
    if args.summary:
        report.write_summary(sys.stdout)
    for entry in report.summary():
        logger.info("%dx%d threads=%d speedup %.2fx (%.2f fps)", entry.width, entry.height,
                    entry.threads, entry.speedup, entry.fps)
    return EXIT_OK


COMMANDS = {
    'convert': cmd_convert,
    'depth': cmd_depth,
    'video': cmd_video,
    'bench': cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        setup_logging()
        logger.error("%s", e)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return e.code if isinstance(e.code, int) else EXIT_OK

    try:
        setup_logging(args.log_level)
    except ValueError as e:  # bad LOG_LEVEL in the environment
        setup_logging('INFO')
        logger.error("%s", e)
        return EXIT_USAGE

    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, FormatError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except DecodeError as e:
        logger.error("%s", e)
        return EXIT_DECODE
    except OSError as e:
        logger.error("%s", e)
        return EXIT_IO


run = main


if __name__ == '__main__':
    sys.exit(main())
