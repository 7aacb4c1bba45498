"""
Stereo Formatting

Packs a left/right pair into a viewable frame: red-cyan anaglyph, half
side-by-side (each eye squeezed 2:1) or full side-by-side.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from executor import RowExecutor, serial
from imgcore import FormatError, ImageRGB8, OutputFormat, check_same_size

logger = logging.getLogger(__name__)


def _anaglyph_rows(left, right, out, y0, y1):
    out[0, y0:y1] = left[0, y0:y1]
    out[1:, y0:y1] = right[1:, y0:y1]


def _squeeze_rows(eye, out, x_offset, y0, y1):
    pairs = eye[:, y0:y1].astype(np.uint16)
    half = (pairs[:, :, 0::2] + pairs[:, :, 1::2] + 1) >> 1
    out[:, y0:y1, x_offset:x_offset + half.shape[2]] = half


def _concat_rows(left, right, out, y0, y1):
    width = left.shape[2]
    out[:, y0:y1, :width] = left[:, y0:y1]
    out[:, y0:y1, width:] = right[:, y0:y1]


def anaglyph(left: ImageRGB8, right: ImageRGB8,
             executor: Optional[RowExecutor] = None) -> ImageRGB8:
    """Red from the left eye, green and blue from the right."""
    check_same_size(left, right)
    out = np.empty_like(left.data)
    (executor or serial()).map_rows(_anaglyph_rows, left.height, left.data, right.data, out)
    return ImageRGB8(out)


def side_by_side(left: ImageRGB8, right: ImageRGB8, half: bool,
                 executor: Optional[RowExecutor] = None) -> ImageRGB8:
    """
    Side-by-side packing.

    half=True (HSBS): each eye box-averaged over column pairs, round half-up,
    giving a width x height frame. half=False (FSBS): 2*width x height.
    """
    check_same_size(left, right)
    executor = executor or serial()
    width, height = left.width, left.height
    if half:
        if width % 2:
            raise FormatError(f"Half side-by-side needs an even width, got {width}")
        out = np.empty((3, height, width), dtype=np.uint8)
        executor.map_rows(_squeeze_rows, height, left.data, out, 0)
        executor.map_rows(_squeeze_rows, height, right.data, out, width // 2)
    else:
        out = np.empty((3, height, 2 * width), dtype=np.uint8)
        executor.map_rows(_concat_rows, height, left.data, right.data, out)
    return ImageRGB8(out)


def split_full(img: ImageRGB8) -> Tuple[ImageRGB8, ImageRGB8]:
    """Crop an FSBS frame back into its (left, right) eyes."""
    if img.width % 2:
        raise FormatError(f"Full side-by-side frame has odd width {img.width}")
    width = img.width // 2
    return ImageRGB8(img.data[:, :, :width].copy()), ImageRGB8(img.data[:, :, width:].copy())


def format_pair(left: ImageRGB8, right: ImageRGB8, fmt: OutputFormat,
                executor: Optional[RowExecutor] = None) -> ImageRGB8:
    if fmt is OutputFormat.ANAGLYPH:
        return anaglyph(left, right, executor)
    if fmt is OutputFormat.HSBS:
        return side_by_side(left, right, True, executor)
    if fmt is OutputFormat.FSBS:
        return side_by_side(left, right, False, executor)
    raise FormatError(f"Unsupported output format: {fmt}")
