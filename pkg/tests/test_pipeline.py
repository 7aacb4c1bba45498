"""Single-frame conversion, frame sequences and timing bookkeeping."""

import io
import os
import tempfile
import time
import unittest

import numpy as np

from bench import synthetic_frame
from executor import RowExecutor
from imgcore import ConversionConfig, DibrMode, ImageRGB8, OutputFormat, encode_ppm
from pipeline import (
    FRAME_CSV_HEADER, DirectorySink, NumberedFrames, SequenceAbortedError,
    SequenceReport, convert_image, convert_sequence, write_timing_csv
)

ALL_FORMATS = (OutputFormat.ANAGLYPH, OutputFormat.HSBS, OutputFormat.FSBS)


def random_image(rng, width, height):
    return ImageRGB8(rng.integers(0, 256, size=(3, height, width), dtype=np.uint8))


def write_frames(directory, images, pattern='frame_%06d.ppm', start=1):
    for offset, img in enumerate(images):
        with open(os.path.join(directory, pattern % (start + offset)), 'wb') as f:
            f.write(encode_ppm(img))


class ConvertImageTest(unittest.TestCase):

    def test_zero_base_anaglyph_is_source(self):
        img = random_image(np.random.default_rng(1), 40, 30)
        for mode in DibrMode:
            result = convert_image(img, ConversionConfig(base=0, dibr_mode=mode))
            self.assertEqual(result.outputs['anaglyph'], img)
            self.assertEqual(result.stereo.left, img)
            self.assertEqual(result.stereo.right, img)
            self.assertEqual(result.timings.inpaint_left_ns, 0)
            self.assertEqual(result.timings.inpaint_right_ns, 0)

    def test_outputs_match_requested_formats(self):
        img = random_image(np.random.default_rng(2), 32, 24)
        cfg = ConversionConfig(base=6, output_formats=(OutputFormat.FSBS, OutputFormat.HSBS))
        result = convert_image(img, cfg)
        self.assertEqual(set(result.outputs), {'fsbs', 'hsbs'})
        self.assertEqual((result.outputs['fsbs'].width, result.outputs['fsbs'].height), (64, 24))
        self.assertEqual((result.outputs['hsbs'].width, result.outputs['hsbs'].height), (32, 24))

    def test_pure_time_identity(self):
        img = random_image(np.random.default_rng(3), 48, 32)
        t = convert_image(img, ConversionConfig(base=8, output_formats=ALL_FORMATS)).timings
        self.assertEqual(
            t.pure_ns,
            t.filter_ns + t.dibr_ns + t.inpaint_left_ns + t.inpaint_right_ns + t.format_ns
        )
        for value in t.as_row():
            self.assertGreaterEqual(value, 0)

    def test_forward_mode_repairs_holes(self):
        img = random_image(np.random.default_rng(4), 48, 32)
        result = convert_image(img, ConversionConfig(base=10))
        self.assertGreater(result.inpaint_stats[0].repaired + result.inpaint_stats[1].repaired, 0)
        self.assertFalse(result.stereo.left_mask.any() or result.stereo.right_mask.any())

    def test_worker_count_never_changes_bytes(self):
        rng = np.random.default_rng(5)
        with RowExecutor(8) as executor:
            for _ in range(50):
                width = 2 * int(rng.integers(32, 129))
                height = int(rng.integers(64, 257))
                img = random_image(rng, width, height)
                cfg = ConversionConfig(
                    base=2 * int(rng.integers(0, 10)),
                    output_formats=ALL_FORMATS,
                    dibr_mode=DibrMode.FORWARD_ZBUFFER if rng.random() < 0.5 else DibrMode.BACKWARD_FALLBACK
                )
                serial_result = convert_image(img, cfg)
                parallel_result = convert_image(img, cfg, executor)
                self.assertEqual(parallel_result.depth, serial_result.depth)
                self.assertEqual(parallel_result.filtered_depth, serial_result.filtered_depth)
                self.assertEqual(parallel_result.outputs, serial_result.outputs)


class SequenceTest(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.in_dir = os.path.join(self.tmp.name, 'in')
        self.out_dir = os.path.join(self.tmp.name, 'out')
        os.makedirs(self.in_dir)
        self.rng = np.random.default_rng(7)

    def tearDown(self):
        self.tmp.cleanup()

    def test_three_frames(self):
        write_frames(self.in_dir, [random_image(self.rng, 24, 16) for _ in range(3)])
        cfg = ConversionConfig(base=4, output_formats=(OutputFormat.ANAGLYPH, OutputFormat.HSBS))
        frames = NumberedFrames(self.in_dir, 'frame_%06d.ppm')
        report = convert_sequence(frames, cfg, None, DirectorySink(self.out_dir, 'frame_%06d.ppm'))

        self.assertEqual([f.index for f in report.frames], [1, 2, 3])
        self.assertEqual(len(report.written), 6)
        for index in (1, 2, 3):
            for name in ('anaglyph', 'hsbs'):
                self.assertTrue(os.path.exists(os.path.join(self.out_dir, f"frame_{index:06d}_{name}.ppm")))
        self.assertEqual(report.pure_sum_ns, sum(f.timings.pure_ns for f in report.frames))
        self.assertLessEqual(report.pure_min_ns, report.pure_mean_ns)
        self.assertLessEqual(report.pure_mean_ns, report.pure_max_ns)
        self.assertGreaterEqual(report.wall_ns, report.pure_sum_ns)

        stream = io.StringIO()
        write_timing_csv(report, stream)
        lines = stream.getvalue().split('\n')
        self.assertEqual(lines[0], ','.join(FRAME_CSV_HEADER))
        self.assertEqual(len([line for line in lines[1:] if line]), 3)

    def test_thirty_frame_sequence_within_a_minute(self):
        write_frames(self.in_dir, [synthetic_frame(640, 360, seed) for seed in range(30)])
        frames = NumberedFrames(self.in_dir, 'frame_%06d.ppm')
        sink = DirectorySink(self.out_dir, 'frame_%06d.ppm')

        start = time.perf_counter()
        report = convert_sequence(frames, ConversionConfig(), None, sink)
        elapsed = time.perf_counter() - start

        self.assertEqual(report.count, 30)
        self.assertEqual(len(os.listdir(self.out_dir)), 30)
        stream = io.StringIO()
        write_timing_csv(report, stream)
        self.assertEqual(len(stream.getvalue().splitlines()), 31)
        self.assertLess(elapsed, 60.0)

    def test_zero_based_numbering(self):
        write_frames(self.in_dir, [random_image(self.rng, 8, 8) for _ in range(2)], start=0)
        self.assertEqual([ref.index for ref in NumberedFrames(self.in_dir, 'frame_%06d.ppm')], [0, 1])
        self.assertEqual([ref.index for ref in NumberedFrames(self.in_dir, 'frame_%06d.ppm', start=1)], [1])

    def test_empty_source(self):
        report = convert_sequence(
            NumberedFrames(self.in_dir, 'frame_%06d.ppm'), ConversionConfig(base=2), None,
            DirectorySink(self.out_dir, 'frame_%06d.ppm')
        )
        self.assertEqual(report.count, 0)
        self.assertEqual(report.written, [])
        self.assertEqual(os.listdir(self.out_dir), [])

    def test_bad_frame_aborts_with_index(self):
        write_frames(self.in_dir, [random_image(self.rng, 8, 8) for _ in range(2)])
        with open(os.path.join(self.in_dir, 'frame_000003.ppm'), 'wb') as f:
            f.write(b"P6\n8 8\n255\n" + bytes(10))
        write_frames(self.in_dir, [random_image(self.rng, 8, 8)], start=4)

        with self.assertRaises(SequenceAbortedError) as caught:
            convert_sequence(
                NumberedFrames(self.in_dir, 'frame_%06d.ppm'), ConversionConfig(base=2), None,
                DirectorySink(self.out_dir, 'frame_%06d.ppm')
            )
        self.assertEqual(caught.exception.index, 3)
        self.assertEqual(caught.exception.report.count, 2)
        self.assertEqual(len(os.listdir(self.out_dir)), 2)

    def test_pattern_needs_placeholder(self):
        with self.assertRaises(ValueError):
            NumberedFrames(self.in_dir, 'frame.ppm')

    def test_empty_report_summary(self):
        report = SequenceReport()
        self.assertEqual(report.pure_mean_ns, 0.0)
        self.assertEqual(report.compute_share, 0.0)
        self.assertIn('frames=0', report.summary_line())


if __name__ == '__main__':
    unittest.main()
