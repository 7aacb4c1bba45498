"""
Depth-Image-Based Rendering

Builds left and right eye frames from a source frame and its filtered depth
map. Parallax is horizontal only, so every output row depends on one source
row and one depth row, and rows are dispatched independently.

Shift rule for column x, depth D, base B and pop threshold T (real valued):

    D > T:   s  = (B/2)(D/255),      xL = x - s,  xR = x + s
    D <= T:  s' = (B/2)(1 - D/255),  xL = x + s', xR = x - s'

Integer columns come from truncating the whole expression toward zero.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numba import njit

from executor import RowExecutor, serial
from imgcore import (
    ConversionConfig, DamageMask, DibrMode, GrayMap, ImageRGB8, check_same_size
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StereoFrames:
    """Left/right eye frames plus their disocclusion masks."""
    left: ImageRGB8
    right: ImageRGB8
    left_mask: DamageMask
    right_mask: DamageMask


@njit(nogil=True, cache=True)
def _offset(d, base, threshold):
    """Signed offset o with xL = x - o and xR = x + o."""
    half = base / 2.0
    if d > threshold:
        return half * (d / 255.0)
    return -(half * (1.0 - d / 255.0))


@njit(nogil=True, cache=True)
def _shift(x, d, base, threshold):
    o = _offset(d, base, threshold)
    return x - o, x + o


def shift_pair(x: int, depth: int, cfg: ConversionConfig, width: Optional[int] = None) -> Tuple[float, float]:
    """
    Real-valued left/right sampling columns for pixel column x.

    Args:
        x: Source column
        depth: Filtered depth value 0-255
        cfg: Conversion settings (base, pop_threshold)
        width: Frame width, needed only when cfg.base is width-derived
    """
    if cfg.base is None and width is None:
        raise ValueError("width is required when the base is derived from the frame width")
    base = cfg.resolve_base(width) if width is not None else cfg.base
    return _shift(float(x), float(depth), float(base), float(cfg.pop_threshold))


@njit(nogil=True, cache=True)
def _backward_rows(src, depth, base, threshold, left, right, y0, y1):
    width = depth.shape[1]
    for y in range(y0, y1):
        for x in range(width):
            x_left, x_right = _shift(float(x), float(depth[y, x]), base, threshold)
            col_left = int(x_left)
            col_right = int(x_right)
            if col_left < 0 or col_left >= width:
                col_left = x
            if col_right < 0 or col_right >= width:
                col_right = x
            for c in range(3):
                left[c, y, x] = src[c, y, col_left]
                right[c, y, x] = src[c, y, col_right]


@njit(nogil=True, cache=True)
def _forward_rows(src, depth, base, threshold, left, right,
                  left_damaged, right_damaged, y0, y1):
    width = depth.shape[1]
    left_z = np.empty(width, dtype=np.int64)
    right_z = np.empty(width, dtype=np.int64)
    for y in range(y0, y1):
        left_z[:] = -1
        right_z[:] = -1
        for x in range(width):
            d = depth[y, x]
            o = _offset(float(d), base, threshold)
            # splat destinations mirror the sampling offsets
            dst_left = int(x + o)
            dst_right = int(x - o)
            # ascending x plus a strict comparison: equal depth keeps the smaller x
            if 0 <= dst_left < width and d > left_z[dst_left]:
                left_z[dst_left] = d
                for c in range(3):
                    left[c, y, dst_left] = src[c, y, x]
            if 0 <= dst_right < width and d > right_z[dst_right]:
                right_z[dst_right] = d
                for c in range(3):
                    right[c, y, dst_right] = src[c, y, x]
        for x in range(width):
            left_damaged[y, x] = left_z[x] < 0
            right_damaged[y, x] = right_z[x] < 0


def _prepare(src: ImageRGB8, depth: GrayMap, cfg: ConversionConfig):
    check_same_size(src, depth)
    base = float(cfg.resolve_base(src.width))
    return base, float(cfg.pop_threshold)


def reconstruct_backward(src: ImageRGB8, depth: GrayMap, cfg: ConversionConfig,
                         executor: Optional[RowExecutor] = None) -> StereoFrames:
    """Sample each eye from the shifted source column; out-of-range falls back to x."""
    base, threshold = _prepare(src, depth, cfg)
    executor = executor or serial()

    left = np.empty_like(src.data)
    right = np.empty_like(src.data)
    executor.map_rows(
        _backward_rows, src.height,
        src.data, depth.data.astype(np.int64), base, threshold, left, right
    )
    clear = DamageMask.clear(src.width, src.height)
    return StereoFrames(ImageRGB8(left), ImageRGB8(right), clear, clear)


def reconstruct_forward(src: ImageRGB8, depth: GrayMap, cfg: ConversionConfig,
                        executor: Optional[RowExecutor] = None) -> StereoFrames:
    """
    Splat each source pixel into both eyes with a per-row depth buffer.

    Nearer (larger D) wins a contested destination; equal depth goes to the
    smaller source column. Pixels nobody lands on are marked damaged and
    left black.
    """
    base, threshold = _prepare(src, depth, cfg)
    executor = executor or serial()

    left = np.zeros_like(src.data)
    right = np.zeros_like(src.data)
    shape = (src.height, src.width)
    left_damaged = np.empty(shape, dtype=np.bool_)
    right_damaged = np.empty(shape, dtype=np.bool_)
    executor.map_rows(
        _forward_rows, src.height,
        src.data, depth.data.astype(np.int64), base, threshold,
        left, right, left_damaged, right_damaged
    )
    return StereoFrames(
        ImageRGB8(left), ImageRGB8(right),
        DamageMask(left_damaged), DamageMask(right_damaged)
    )


def reconstruct(src: ImageRGB8, depth: GrayMap, cfg: ConversionConfig,
                executor: Optional[RowExecutor] = None) -> StereoFrames:
    """Dispatch on cfg.dibr_mode."""
    if cfg.dibr_mode is DibrMode.BACKWARD_FALLBACK:
        return reconstruct_backward(src, depth, cfg, executor)
    return reconstruct_forward(src, depth, cfg, executor)
