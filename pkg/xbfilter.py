"""
Cross-Bilateral Depth Filter

Joint bilateral smoothing of the depth map with range weights taken from
the source luma:

    D'(p) = sum_q w(p,q) D(q) / sum_q w(p,q)
    w(p,q) = exp(-|p-q|^2 / 2 sigma_s^2) * exp(-(I(p)-I(q))^2 / 2 sigma_r^2)

over a square window of radius ceil(2 sigma_s) clipped to the frame.
Accumulation is float64; the final value is rounded half-up.
"""

import logging
import math
from typing import Optional

import numpy as np
from numba import njit

from executor import RowExecutor, serial
from imgcore import ConversionConfig, GrayMap, check_same_size

logger = logging.getLogger(__name__)


def window_radius(sigma_spatial: float) -> int:
    return int(math.ceil(2.0 * sigma_spatial))


def spatial_kernel(sigma_spatial: float) -> np.ndarray:
    """Spatial weights indexed [dy + r, dx + r]."""
    radius = window_radius(sigma_spatial)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    dist2 = offsets[:, None] ** 2 + offsets[None, :] ** 2
    return np.exp(-dist2 / (2.0 * sigma_spatial * sigma_spatial))


def range_table(sigma_range: float) -> np.ndarray:
    """Range weights indexed by the absolute luma difference 0..255."""
    diffs = np.arange(256, dtype=np.float64)
    return np.exp(-(diffs * diffs) / (2.0 * sigma_range * sigma_range))


@njit(nogil=True, cache=True)
def _bilateral_rows(depth, guide, spatial, range_lut, radius, out, y0, y1):
    height, width = depth.shape
    for y in range(y0, y1):
        qy0 = max(0, y - radius)
        qy1 = min(height - 1, y + radius)
        for x in range(width):
            qx0 = max(0, x - radius)
            qx1 = min(width - 1, x + radius)
            center = guide[y, x]
            num = 0.0
            den = 0.0
            for qy in range(qy0, qy1 + 1):
                sy = qy - y + radius
                for qx in range(qx0, qx1 + 1):
                    w = spatial[sy, qx - x + radius] * range_lut[abs(guide[qy, qx] - center)]
                    num += w * depth[qy, qx]
                    den += w
            out[y, x] = num / den


def cross_bilateral_real(depth: GrayMap, guide: GrayMap, cfg: ConversionConfig,
                         executor: Optional[RowExecutor] = None) -> np.ndarray:
    """Filtered depth before rounding, as a float64 (h, w) array."""
    check_same_size(depth, guide)
    executor = executor or serial()

    out = np.empty((depth.height, depth.width), dtype=np.float64)
    executor.map_rows(
        _bilateral_rows, depth.height,
        depth.data.astype(np.float64),
        guide.data.astype(np.int64),
        spatial_kernel(cfg.sigma_spatial),
        range_table(cfg.sigma_range),
        window_radius(cfg.sigma_spatial),
        out
    )
    return out


def cross_bilateral(depth: GrayMap, guide: GrayMap, cfg: ConversionConfig,
                    executor: Optional[RowExecutor] = None) -> GrayMap:
    """Edge-preserving depth smoothing guided by luma."""
    filtered = cross_bilateral_real(depth, guide, cfg, executor)
    rounded = np.clip(np.floor(filtered + 0.5), 0, 255)
    return GrayMap(rounded.astype(np.uint8))
