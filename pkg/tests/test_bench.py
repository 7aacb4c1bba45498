"""Benchmark harness bookkeeping on tiny frames."""

import io
import unittest

from bench import (
    BENCH_CSV_HEADER, BenchReport, BenchRow, bench, physical_cores, synthetic_frame
)
from imgcore import ConfigError, ConversionConfig
from pipeline import StageTimings

SMALL = ConversionConfig(sigma_spatial=2.0)


def timing(pure_part):
    return StageTimings(depth_gen_ns=5, filter_ns=pure_part)


class SyntheticFrameTest(unittest.TestCase):

    def test_deterministic_per_seed(self):
        self.assertEqual(synthetic_frame(40, 30, 2019), synthetic_frame(40, 30, 2019))
        self.assertNotEqual(synthetic_frame(40, 30, 2019), synthetic_frame(40, 30, 7))

    def test_dimensions(self):
        frame = synthetic_frame(48, 20)
        self.assertEqual((frame.width, frame.height), (48, 20))


class BenchReportTest(unittest.TestCase):

    def make_report(self):
        report = BenchReport(target_fps=25.0)
        for rep, ns in enumerate((100, 300, 200)):
            report.rows.append(BenchRow(64, 32, 1, rep, timing(ns)))
        for rep, ns in enumerate((50, 40, 60)):
            report.rows.append(BenchRow(64, 32, 4, rep, timing(ns)))
        return report

    def test_median_and_speedup(self):
        report = self.make_report()
        self.assertEqual(report.median_pure_ns(64, 32, 1), 200.0)
        self.assertEqual(report.median_pure_ns(64, 32, 4), 50.0)
        self.assertEqual(report.speedup(64, 32, 1), 1.0)
        self.assertEqual(report.speedup(64, 32, 4), 4.0)

    def test_summary_flags_realtime(self):
        summary = self.make_report().summary()
        self.assertEqual([s.threads for s in summary], [1, 4])
        self.assertTrue(all(s.realtime for s in summary))
        self.assertAlmostEqual(summary[1].fps, 1e9 / 50)

    def test_missing_configuration(self):
        with self.assertRaises(KeyError):
            self.make_report().median_pure_ns(64, 32, 2)

    def test_depth_time_stays_out_of_pure(self):
        self.assertEqual(timing(10).pure_ns, 10)


class BenchRunTest(unittest.TestCase):

    def test_single_thread_speedup_is_one(self):
        report = bench([(32, 24)], [1], 3, SMALL)
        self.assertEqual(len(report.rows), 3)
        self.assertEqual(report.speedup(32, 24, 1), 1.0)

    def test_baseline_is_inserted(self):
        report = bench([(32, 24)], [2], 3, SMALL)
        self.assertEqual(report.thread_counts(), [1, 2])
        self.assertEqual(len(report.rows), 6)

    def test_csv_rows(self):
        report = bench([(32, 24), (16, 16)], [1, 2], 3, SMALL)
        stream = io.StringIO()
        report.write_csv(stream)
        lines = stream.getvalue().split('\n')
        self.assertEqual(lines[0], ','.join(BENCH_CSV_HEADER))
        self.assertEqual(len([line for line in lines[1:] if line]), 3 * 2 * 2)
        self.assertNotIn('\r', stream.getvalue())

    def test_too_few_reps(self):
        with self.assertRaises(ConfigError):
            bench([(32, 24)], [1], 2, SMALL)

    def test_bad_thread_count(self):
        with self.assertRaises(ConfigError):
            bench([(32, 24)], [0], 3, SMALL)

    @unittest.skipUnless(physical_cores() >= 4, 'needs at least 4 physical cores')
    def test_parallel_speedup_at_4k(self):
        cores = physical_cores()
        report = bench([(3840, 2160)], [1, cores], 5, ConversionConfig())
        self.assertGreaterEqual(report.speedup(3840, 2160, cores), 2.0)

    def test_physical_cores_positive(self):
        self.assertGreaterEqual(physical_cores(), 1)


if __name__ == '__main__':
    unittest.main()
