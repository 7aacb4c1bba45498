"""Block inpainting: hand examples, random masks and a snapshot-pass simulator."""

import unittest

import numpy as np

from executor import RowExecutor
from imgcore import ConversionConfig, DamageMask, DimensionMismatchError, ImageRGB8
from inpaint import frame_tiles, inpaint, inpaint_with_stats


def simulate(colors, damaged):
    """Frame-wide snapshot passes with plain Python loops."""
    colors = colors.astype(np.int64).copy()
    damaged = damaged.copy()
    _, h, w = colors.shape
    passes = 0
    while damaged.any():
        snapshot = damaged.copy()
        repaired = 0
        for y in range(h):
            for x in range(w):
                if not snapshot[y, x]:
                    continue
                neighbours = [
                    (yy, xx)
                    for yy in range(y - 1, y + 2)
                    for xx in range(x - 1, x + 2)
                    if (yy, xx) != (y, x) and 0 <= yy < h and 0 <= xx < w and not snapshot[yy, xx]
                ]
                if len(neighbours) >= 2:
                    for c in range(3):
                        total = sum(int(colors[c, yy, xx]) for yy, xx in neighbours)
                        colors[c, y, x] = int(np.floor(total / len(neighbours) + 0.5))
                    damaged[y, x] = False
                    repaired += 1
        if repaired == 0:
            colors[:, damaged] = 128
            break
        passes += 1
    return colors.astype(np.uint8), passes


class InpaintExamplesTest(unittest.TestCase):

    def setUp(self):
        self.cfg = ConversionConfig(inpaint_block=4)

    def test_clean_mask_is_identity(self):
        frame = ImageRGB8.filled(6, 5, (9, 8, 7))
        out, stats = inpaint_with_stats(frame, DamageMask.clear(6, 5), self.cfg)
        self.assertEqual(out, frame)
        self.assertEqual(stats.passes, 0)

    def test_single_pixel_mean(self):
        r = np.array([[10, 10, 10], [10, 0, 20], [20, 20, 20]], dtype=np.uint8)
        frame = ImageRGB8.from_planes(r, r // 2, 255 - r)
        damaged = np.zeros((3, 3), dtype=bool)
        damaged[1, 1] = True
        out = inpaint(frame, DamageMask(damaged), self.cfg)
        self.assertEqual(int(out.r[1, 1]), 15)
        self.assertEqual(int(out.g[1, 1]), 8)   # mean 7.5 rounds up
        self.assertEqual(int(out.b[1, 1]), 240)

    def test_two_by_two_hole_in_one_pass(self):
        rng = np.random.default_rng(31)
        frame = ImageRGB8(rng.integers(0, 256, size=(3, 8, 8), dtype=np.uint8))
        damaged = np.zeros((8, 8), dtype=bool)
        damaged[3:5, 3:5] = True
        out, stats = inpaint_with_stats(frame, DamageMask(damaged), self.cfg)
        self.assertEqual(stats.passes, 1)
        self.assertEqual(stats.repaired, 4)

    def test_fully_damaged_frame_turns_gray(self):
        frame = ImageRGB8.filled(8, 8, (200, 10, 30))
        out, stats = inpaint_with_stats(frame, DamageMask(np.ones((8, 8), dtype=bool)), self.cfg)
        self.assertEqual(out, ImageRGB8.filled(8, 8, (128, 128, 128)))
        self.assertEqual(stats.gray_filled, 64)
        self.assertTrue(stats.tiling_dropped)

    def test_cross_tile_neighbours_are_read(self):
        # the hole sits alone in the second tile; its neighbours live in the first
        frame = ImageRGB8.filled(8, 4, (40, 40, 40))
        damaged = np.zeros((4, 8), dtype=bool)
        damaged[:, 4:] = True
        out, stats = inpaint_with_stats(frame, DamageMask(damaged), self.cfg)
        self.assertEqual(out, ImageRGB8.filled(8, 4, (40, 40, 40)))
        self.assertFalse(stats.tiling_dropped)

    def test_size_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            inpaint(ImageRGB8.filled(4, 4), DamageMask.clear(4, 5), self.cfg)

    def test_tiles_cover_frame(self):
        tiles = frame_tiles(10, 7, 4)
        covered = np.zeros((7, 10), dtype=int)
        for y0, y1, x0, x1 in tiles:
            covered[y0:y1, x0:x1] += 1
        self.assertTrue(np.all(covered == 1))


class InpaintPropertiesTest(unittest.TestCase):

    def test_random_masks(self):
        rng = np.random.default_rng(99)
        for case in range(500):
            w, h = int(rng.integers(4, 48)), int(rng.integers(4, 48))
            frame = ImageRGB8(rng.integers(0, 256, size=(3, h, w), dtype=np.uint8))
            density = rng.uniform(0.01, 0.60)
            damaged = rng.random((h, w)) < density
            if damaged.all():
                damaged[int(rng.integers(h)), int(rng.integers(w))] = False
            cfg = ConversionConfig(inpaint_block=int(rng.integers(4, 20)))

            out, stats = inpaint_with_stats(frame, DamageMask(damaged), cfg)
            self.assertLessEqual(stats.passes, w + h, f"case {case}")
            self.assertEqual(stats.repaired + stats.gray_filled, int(damaged.sum()))
            np.testing.assert_array_equal(
                out.data[:, ~damaged], frame.data[:, ~damaged], err_msg=f"case {case}"
            )

    def test_matches_simulator_on_small_holes(self):
        rng = np.random.default_rng(5)
        frame = ImageRGB8(rng.integers(0, 256, size=(3, 8, 8), dtype=np.uint8))
        cfg = ConversionConfig(inpaint_block=4)
        holes = []
        for y in range(8):
            for x in range(8):
                single = np.zeros((8, 8), dtype=bool)
                single[y, x] = True
                holes.append(single)
        for y in range(7):
            for x in range(7):
                square = np.zeros((8, 8), dtype=bool)
                square[y:y + 2, x:x + 2] = True
                holes.append(square)

        for damaged in holes:
            expected, expected_passes = simulate(frame.data, damaged)
            out, stats = inpaint_with_stats(frame, DamageMask(damaged), cfg)
            np.testing.assert_array_equal(out.data, expected)
            self.assertEqual(stats.passes, expected_passes)

    def test_matches_simulator_on_random_masks(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            frame = ImageRGB8(rng.integers(0, 256, size=(3, 12, 16), dtype=np.uint8))
            damaged = rng.random((12, 16)) < 0.5
            expected, _ = simulate(frame.data, damaged)
            out = inpaint(frame, DamageMask(damaged), ConversionConfig(inpaint_block=5))
            np.testing.assert_array_equal(out.data, expected)

    def test_thread_count_invariant(self):
        rng = np.random.default_rng(8)
        frame = ImageRGB8(rng.integers(0, 256, size=(3, 90, 130), dtype=np.uint8))
        mask = DamageMask(rng.random((90, 130)) < 0.4)
        cfg = ConversionConfig(inpaint_block=16)
        expected = inpaint(frame, mask, cfg)
        with RowExecutor(8) as executor:
            self.assertEqual(inpaint(frame, mask, cfg, executor), expected)


if __name__ == '__main__':
    unittest.main()
