"""
Depth Map Generation

Builds a per-pixel depth map from a single frame: a vertical ground-plane
ramp blended with block edge density, bilinearly upsampled from block
centres. Larger values are nearer to the viewer.

This stage runs on the serial path: it never touches the executor.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from imgcore import ConversionConfig, GrayMap, ImageRGB8, luma

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BlockGrid:
    """Block-level depth estimates, values[j, i] for block row j, column i."""
    blocks_x: int
    blocks_y: int
    block: int
    values: np.ndarray  # float64, shape (blocks_y, blocks_x), in [0, 255]


def block_starts(size: int, block: int) -> np.ndarray:
    return np.arange(0, size, block)


def block_centers(size: int, block: int) -> np.ndarray:
    """Midpoint of each block's actual pixel span; edge blocks may be short."""
    starts = block_starts(size, block)
    ends = np.minimum(starts + block, size)
    return (starts + ends - 1) / 2.0


def sobel_magnitude(gray: GrayMap) -> GrayMap:
    """3x3 Sobel with clamp-to-edge borders: min(255, (|Gx| + |Gy|) // 4)."""
    p = np.pad(gray.data.astype(np.int32), 1, mode='edge')
    tl, tc, tr = p[:-2, :-2], p[:-2, 1:-1], p[:-2, 2:]
    ml, mr = p[1:-1, :-2], p[1:-1, 2:]
    bl, bc, br = p[2:, :-2], p[2:, 1:-1], p[2:, 2:]

    gx = (tr + 2 * mr + br) - (tl + 2 * ml + bl)
    gy = (bl + 2 * bc + br) - (tl + 2 * tc + tr)
    magnitude = (np.abs(gx) + np.abs(gy)) // 4
    return GrayMap(np.minimum(magnitude, 255).astype(np.uint8))


def block_depth(edges: GrayMap, cfg: ConversionConfig) -> BlockGrid:
    """
    Per-block depth: alpha * 255 * (y_c / (height - 1)) + beta * mean(edges).

    y_c is the centre row of the block. A single-row frame has no ramp.
    """
    height, width = edges.height, edges.width
    block = cfg.depth_block
    row_starts = block_starts(height, block)
    col_starts = block_starts(width, block)

    sums = np.add.reduceat(edges.data.astype(np.int64), row_starts, axis=0)
    sums = np.add.reduceat(sums, col_starts, axis=1)
    row_counts = np.diff(np.append(row_starts, height))
    col_counts = np.diff(np.append(col_starts, width))
    means = sums / np.outer(row_counts, col_counts)

    centers_y = block_centers(height, block)
    if height > 1:
        ramp = centers_y / (height - 1)
    else:
        ramp = np.zeros_like(centers_y)

    values = cfg.alpha * 255.0 * ramp[:, None] + cfg.beta * means
    return BlockGrid(
        blocks_x=len(col_starts),
        blocks_y=len(row_starts),
        block=block,
        values=values
    )


def _interp_weights(size: int, centers: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lower/upper sample index and blend factor for every pixel coordinate."""
    coords = np.arange(size, dtype=np.float64)
    if len(centers) == 1:
        zeros = np.zeros(size, dtype=np.intp)
        return zeros, zeros, np.zeros(size)

    pos = np.clip(coords, centers[0], centers[-1])
    lower = np.searchsorted(centers, pos, side='right') - 1
    lower = np.clip(lower, 0, len(centers) - 2)
    upper = lower + 1
    t = (pos - centers[lower]) / (centers[upper] - centers[lower])
    return lower, upper, t


def upsample_blocks(grid: BlockGrid, width: int, height: int) -> GrayMap:
    """Bilinear upsample with block centres as sample points, clamped at borders."""
    x0, x1, tx = _interp_weights(width, block_centers(width, grid.block))
    y0, y1, ty = _interp_weights(height, block_centers(height, grid.block))

    values = grid.values
    top_a, top_b = values[y0][:, x0], values[y0][:, x1]
    bot_a, bot_b = values[y1][:, x0], values[y1][:, x1]
    # a + t * (b - a) keeps equal samples exact
    top = top_a + tx[None, :] * (top_b - top_a)
    bottom = bot_a + tx[None, :] * (bot_b - bot_a)
    depth = top + ty[:, None] * (bottom - top)

    rounded = np.clip(np.floor(depth + 0.5), 0, 255)
    return GrayMap(rounded.astype(np.uint8))


def generate_depth(img: ImageRGB8, cfg: ConversionConfig) -> GrayMap:
    """luma -> Sobel -> block depth -> bilinear upsample."""
    edges = sobel_magnitude(luma(img))
    grid = block_depth(edges, cfg)
    logger.debug("Depth grid %dx%d for %r", grid.blocks_x, grid.blocks_y, img)
    return upsample_blocks(grid, img.width, img.height)
