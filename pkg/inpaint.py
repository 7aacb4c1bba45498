"""
Block Inpainting

Fills damaged (disoccluded) pixels from their undamaged 8-neighbours.

The frame is split into square tiles that are repaired in passes. Every pass
works against a snapshot of the damage state taken at the pass boundary: a
damaged pixel with at least two undamaged neighbours in the snapshot takes
the rounded mean of those neighbours and becomes undamaged for the next
pass. Neighbours in other tiles are read too; tiles only split the work.

If a pass repairs nothing while damage remains, passes continue frame-wide;
if that stalls as well, what is left is filled with mid gray.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numba import njit

from config import FALLBACK_GRAY
from executor import RowExecutor, serial
from imgcore import ConversionConfig, DamageMask, ImageRGB8, check_same_size

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InpaintStats:
    passes: int = 0          # productive passes only
    repaired: int = 0
    gray_filled: int = 0
    tiling_dropped: bool = False


def frame_tiles(width: int, height: int, block: int) -> List[Tuple[int, int, int, int]]:
    """(y0, y1, x0, x1) for every tile, row-major; edge tiles may be smaller."""
    return [
        (y0, min(y0 + block, height), x0, min(x0 + block, width))
        for y0 in range(0, height, block)
        for x0 in range(0, width, block)
    ]


@njit(nogil=True, cache=True)
def _repair_tile(colors, snapshot, damaged, y0, y1, x0, x1):
    # Only snapshot-undamaged pixels are read and only snapshot-damaged
    # pixels are written, so colors needs no copy per pass.
    height, width = snapshot.shape
    repaired = 0
    for y in range(y0, y1):
        for x in range(x0, x1):
            if not snapshot[y, x]:
                continue
            n = 0
            s0 = 0
            s1 = 0
            s2 = 0
            for yy in range(max(0, y - 1), min(height, y + 2)):
                for xx in range(max(0, x - 1), min(width, x + 2)):
                    if (yy != y or xx != x) and not snapshot[yy, xx]:
                        n += 1
                        s0 += colors[0, yy, xx]
                        s1 += colors[1, yy, xx]
                        s2 += colors[2, yy, xx]
            if n >= 2:
                colors[0, y, x] = (2 * s0 + n) // (2 * n)
                colors[1, y, x] = (2 * s1 + n) // (2 * n)
                colors[2, y, x] = (2 * s2 + n) // (2 * n)
                damaged[y, x] = False
                repaired += 1
    return repaired


def inpaint_with_stats(frame: ImageRGB8, mask: DamageMask, cfg: ConversionConfig,
                       executor: Optional[RowExecutor] = None) -> Tuple[ImageRGB8, InpaintStats]:
    """
    Repair every damaged pixel of frame.

    Returns:
        (repaired frame, InpaintStats)
    """
    check_same_size(frame, mask)
    if not mask.any():
        return frame, InpaintStats()

    executor = executor or serial()
    colors = frame.data.copy()
    damaged = mask.damaged.copy()
    remaining = int(np.count_nonzero(damaged))
    all_tiles = frame_tiles(frame.width, frame.height, cfg.inpaint_block)
    whole_frame = [(0, frame.height, 0, frame.width)]
    tiled = True
    passes = 0
    repaired_total = 0

    while remaining:
        snapshot = damaged.copy()
        tiles = all_tiles if tiled else whole_frame
        tasks = [
            (colors, snapshot, damaged) + tile
            for tile in tiles
            if snapshot[tile[0]:tile[1], tile[2]:tile[3]].any()
        ]
        repaired = sum(executor.map_tasks(_repair_tile, tasks))

        if repaired == 0:
            if tiled:
                logger.debug("Inpaint stalled with %d damaged pixels; going frame-wide", remaining)
                tiled = False
                continue
            logger.warning("Inpaint stalled; filling %d pixels with gray", remaining)
            colors[:, damaged] = FALLBACK_GRAY
            break

        passes += 1
        repaired_total += repaired
        remaining -= repaired

    stats = InpaintStats(
        passes=passes,
        repaired=repaired_total,
        gray_filled=remaining,
        tiling_dropped=not tiled
    )
    logger.debug("Inpaint finished: %s", stats)
    return ImageRGB8(colors), stats


def inpaint(frame: ImageRGB8, mask: DamageMask, cfg: ConversionConfig,
            executor: Optional[RowExecutor] = None) -> ImageRGB8:
    """Repair every damaged pixel of frame; undamaged pixels are kept byte for byte."""
    repaired, _ = inpaint_with_stats(frame, mask, cfg, executor)
    return repaired
