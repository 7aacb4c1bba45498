"""
Image Core Module

Raster types shared by every pipeline stage, the conversion configuration,
the error hierarchy, luma conversion and bit-exact binary PNM codecs
(P6 PPM for colour frames, P5 PGM for depth maps).
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional, Tuple

import numpy as np

from config import (
    BASE_DIVISOR, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_DEPTH_BLOCK,
    DEFAULT_INPAINT_BLOCK, DEFAULT_POP_THRESHOLD, DEFAULT_SIGMA_RANGE,
    DEFAULT_SIGMA_SPATIAL
)

logger = logging.getLogger(__name__)


# ============================================================================
# Errors
# ============================================================================

class StereoError(Exception):
    """Base class for every error raised by the converter"""


class DecodeError(StereoError, ValueError):
    """Input bytes are not an acceptable PNM image"""


class BadMagicError(DecodeError):
    """Magic number is not the expected P6/P5"""


class UnsupportedMaxvalError(DecodeError):
    """Only maxval 255 is accepted"""


class TruncatedDataError(DecodeError):
    """Header or pixel payload ends early"""


class ZeroDimensionError(DecodeError):
    """Width or height is zero"""


class MalformedHeaderError(DecodeError):
    """Header token is not a decimal number"""


class DimensionMismatchError(StereoError, ValueError):
    """Two rasters that must line up do not"""


class ConfigError(StereoError, ValueError):
    """ConversionConfig invariant violated"""


class FormatError(StereoError, ValueError):
    """Stereo pair cannot be packed into the requested layout"""


def check_same_size(*rasters) -> None:
    """Raise DimensionMismatchError unless all rasters share width and height."""
    sizes = {(r.width, r.height) for r in rasters}
    if len(sizes) > 1:
        raise DimensionMismatchError(
            f"Raster sizes differ: {sorted(sizes)}"
        )


def _frozen(array: np.ndarray) -> np.ndarray:
    view = np.ascontiguousarray(array).view()
    view.flags.writeable = False
    return view


# ============================================================================
# Raster types
# ============================================================================

@dataclass(frozen=True, eq=False)
class ImageRGB8:
    """
    Planar 8-bit RGB raster.

    `data` has shape (3, height, width); plane c, row y, column x is the
    sample at row-major index y * width + x of channel c.
    """
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.uint8:
            raise TypeError(f"ImageRGB8 needs uint8 samples, got {data.dtype}")
        if data.ndim != 3 or data.shape[0] != 3:
            raise ValueError(f"ImageRGB8 needs shape (3, h, w), got {data.shape}")
        if data.shape[1] < 1 or data.shape[2] < 1:
            raise ValueError(f"ImageRGB8 dimensions must be >= 1, got {data.shape[2]}x{data.shape[1]}")
        object.__setattr__(self, 'data', _frozen(data))

    @classmethod
    def from_planes(cls, r: np.ndarray, g: np.ndarray, b: np.ndarray) -> 'ImageRGB8':
        if not (np.shape(r) == np.shape(g) == np.shape(b)):
            raise DimensionMismatchError("Colour planes differ in shape")
        return cls(np.stack([r, g, b]).astype(np.uint8, copy=False))

    @classmethod
    def from_interleaved(cls, pixels: np.ndarray) -> 'ImageRGB8':
        """Build from an (h, w, 3) array."""
        return cls(np.ascontiguousarray(np.asarray(pixels, dtype=np.uint8).transpose(2, 0, 1)))

    @classmethod
    def filled(cls, width: int, height: int, rgb: Tuple[int, int, int] = (0, 0, 0)) -> 'ImageRGB8':
        data = np.empty((3, height, width), dtype=np.uint8)
        for channel, value in enumerate(rgb):
            data[channel] = value
        return cls(data)

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def r(self) -> np.ndarray:
        return self.data[0]

    @property
    def g(self) -> np.ndarray:
        return self.data[1]

    @property
    def b(self) -> np.ndarray:
        return self.data[2]

    def to_interleaved(self) -> np.ndarray:
        return np.ascontiguousarray(self.data.transpose(1, 2, 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageRGB8):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None

    def __repr__(self) -> str:
        return f"ImageRGB8({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class GrayMap:
    """Single-channel 8-bit raster of shape (height, width): luma, edges or depth."""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.uint8:
            raise TypeError(f"GrayMap needs uint8 samples, got {data.dtype}")
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"GrayMap needs a non-empty (h, w) array, got {data.shape}")
        object.__setattr__(self, 'data', _frozen(data))

    @classmethod
    def filled(cls, width: int, height: int, value: int = 0) -> 'GrayMap':
        return cls(np.full((height, width), value, dtype=np.uint8))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayMap):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None

    def __repr__(self) -> str:
        return f"GrayMap({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class DamageMask:
    """Per-pixel disocclusion flags; True marks a damaged pixel."""
    damaged: np.ndarray

    def __post_init__(self):
        damaged = np.asarray(self.damaged, dtype=np.bool_)
        if damaged.ndim != 2:
            raise ValueError(f"DamageMask needs an (h, w) array, got {damaged.shape}")
        object.__setattr__(self, 'damaged', _frozen(damaged))

    @classmethod
    def clear(cls, width: int, height: int) -> 'DamageMask':
        return cls(np.zeros((height, width), dtype=np.bool_))

    @property
    def width(self) -> int:
        return self.damaged.shape[1]

    @property
    def height(self) -> int:
        return self.damaged.shape[0]

    def count(self) -> int:
        return int(np.count_nonzero(self.damaged))

    def any(self) -> bool:
        return bool(self.damaged.any())

    def __eq__(self, other) -> bool:
        if not isinstance(other, DamageMask):
            return NotImplemented
        return np.array_equal(self.damaged, other.damaged)

    __hash__ = None


# ============================================================================
# Conversion configuration
# ============================================================================

class DibrMode(Enum):
    """Left/right reconstruction strategy"""
    FORWARD_ZBUFFER = "forward_zbuffer"
    BACKWARD_FALLBACK = "backward_fallback"

    @classmethod
    def parse(cls, name: str) -> 'DibrMode':
        aliases = {'forward': cls.FORWARD_ZBUFFER, 'backward': cls.BACKWARD_FALLBACK}
        if name in aliases:
            return aliases[name]
        try:
            return cls(name)
        except ValueError:
            raise ConfigError(f"Unknown DIBR mode: {name}")


class OutputFormat(Enum):
    """Viewable stereo layouts"""
    ANAGLYPH = "anaglyph"
    HSBS = "hsbs"
    FSBS = "fsbs"

    @classmethod
    def parse(cls, name: str) -> 'OutputFormat':
        try:
            return cls(name.lower())
        except ValueError:
            raise ConfigError(f"Unknown output format: {name}")


def default_base(width: int) -> int:
    """Stereo base scaled to frame width: 30 px at 3840, always even."""
    return 2 * int(np.floor(width / BASE_DIVISOR + 0.5))


@dataclass(frozen=True)
class ConversionConfig:
    """
    All tunables of the conversion pipeline.

    base=None derives the stereo base from the frame width (see default_base).
    """
    base: Optional[int] = None
    pop_threshold: int = DEFAULT_POP_THRESHOLD
    sigma_spatial: float = DEFAULT_SIGMA_SPATIAL
    sigma_range: float = DEFAULT_SIGMA_RANGE
    depth_block: int = DEFAULT_DEPTH_BLOCK
    inpaint_block: int = DEFAULT_INPAINT_BLOCK
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    dibr_mode: DibrMode = DibrMode.FORWARD_ZBUFFER
    output_formats: Tuple[OutputFormat, ...] = field(
        default=(OutputFormat.ANAGLYPH,)
    )

    def __post_init__(self):
        formats = []
        for fmt in self.output_formats:
            fmt = fmt if isinstance(fmt, OutputFormat) else OutputFormat.parse(fmt)
            if fmt not in formats:
                formats.append(fmt)
        object.__setattr__(self, 'output_formats', tuple(formats))
        if isinstance(self.dibr_mode, str):
            object.__setattr__(self, 'dibr_mode', DibrMode.parse(self.dibr_mode))
        self.validate()

    def validate(self) -> None:
        """Raise ConfigError for the first violated invariant."""
        if self.base is not None and (self.base < 0 or self.base % 2 != 0):
            raise ConfigError(f"base must be even and >= 0, got {self.base}")
        if not 0 <= self.pop_threshold <= 255:
            raise ConfigError(f"pop_threshold must be in [0, 255], got {self.pop_threshold}")
        if self.sigma_spatial <= 0 or self.sigma_range <= 0:
            raise ConfigError(
                f"sigmas must be > 0, got spatial={self.sigma_spatial} range={self.sigma_range}"
            )
        if self.depth_block < 4 or self.inpaint_block < 4:
            raise ConfigError(
                f"block sizes must be >= 4, got depth={self.depth_block} inpaint={self.inpaint_block}"
            )
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ConfigError(f"alpha and beta must be in [0, 1], got {self.alpha}, {self.beta}")
        if self.alpha + self.beta > 1.0 + 1e-12:
            raise ConfigError(f"alpha + beta must be <= 1, got {self.alpha + self.beta}")
        if not self.output_formats:
            raise ConfigError("at least one output format is required")

    def resolve_base(self, width: int) -> int:
        return default_base(width) if self.base is None else self.base

    def replace(self, **changes) -> 'ConversionConfig':
        return replace(self, **changes)


def parse_formats(names: Iterable[str]) -> Tuple[OutputFormat, ...]:
    return tuple(OutputFormat.parse(name) for name in names)


# ============================================================================
# Colour conversion
# ============================================================================

def luma(img: ImageRGB8) -> GrayMap:
    """Integer BT.601-style luma: Y = (77R + 150G + 29B + 128) >> 8."""
    r = img.r.astype(np.uint32)
    g = img.g.astype(np.uint32)
    b = img.b.astype(np.uint32)
    y = (77 * r + 150 * g + 29 * b + 128) >> 8
    return GrayMap(y.astype(np.uint8))


# ============================================================================
# PNM codecs
# ============================================================================

_WHITESPACE = frozenset(b' \t\n\r\x0b\x0c')
_DIGITS = frozenset(b'0123456789')


def _parse_header(data: bytes, magic: bytes) -> Tuple[int, int, int]:
    """
    Parse a binary PNM header.

    Returns:
        (width, height, payload offset)
    """
    if data[:2] != magic:
        raise BadMagicError(f"Expected magic {magic!r}, got {bytes(data[:2])!r}")

    pos = 2
    size = len(data)
    if pos < size and data[pos] not in _WHITESPACE and data[pos] != ord('#'):
        raise BadMagicError(f"Expected magic {magic!r}, got {bytes(data[:3])!r}")

    fields = []
    while len(fields) < 3:
        while pos < size:
            if data[pos] in _WHITESPACE:
                pos += 1
            elif data[pos] == ord('#'):
                eol = data.find(b'\n', pos)
                pos = size if eol < 0 else eol + 1
            else:
                break
        if pos >= size:
            raise TruncatedDataError("PNM header truncated")
        start = pos
        while pos < size and data[pos] in _DIGITS:
            pos += 1
        if pos == start:
            raise MalformedHeaderError(f"Unexpected byte {data[pos]:#04x} in PNM header")
        fields.append(int(data[start:pos]))

    if pos >= size:
        raise TruncatedDataError("PNM header truncated")
    if data[pos] not in _WHITESPACE:
        raise MalformedHeaderError("PNM header must end with a single whitespace byte")
    pos += 1

    width, height, maxval = fields
    if width == 0 or height == 0:
        raise ZeroDimensionError(f"Zero dimension {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxvalError(f"unsupported maxval {maxval}")
    return width, height, pos


def _payload(data: bytes, offset: int, count: int) -> np.ndarray:
    available = len(data) - offset
    if available < count:
        raise TruncatedDataError(f"Pixel data truncated: {available} of {count} bytes")
    if available > count:
        logger.debug("Ignoring %d trailing bytes after PNM payload", available - count)
    return np.frombuffer(data, dtype=np.uint8, count=count, offset=offset)


def decode_ppm(data: bytes) -> ImageRGB8:
    """Decode a binary P6 PPM with maxval 255."""
    data = bytes(data)
    width, height, offset = _parse_header(data, b'P6')
    pixels = _payload(data, offset, width * height * 3)
    return ImageRGB8.from_interleaved(pixels.reshape(height, width, 3))


def encode_ppm(img: ImageRGB8) -> bytes:
    header = f"P6\n{img.width} {img.height}\n255\n".encode('ascii')
    return header + img.to_interleaved().tobytes()


def decode_pgm(data: bytes) -> GrayMap:
    """Decode a binary P5 PGM with maxval 255."""
    data = bytes(data)
    width, height, offset = _parse_header(data, b'P5')
    pixels = _payload(data, offset, width * height)
    return GrayMap(pixels.reshape(height, width).copy())


def encode_pgm(gray: GrayMap) -> bytes:
    header = f"P5\n{gray.width} {gray.height}\n255\n".encode('ascii')
    return header + np.ascontiguousarray(gray.data).tobytes()


def read_ppm(path: str) -> ImageRGB8:
    with open(path, 'rb') as f:
        return decode_ppm(f.read())


def write_ppm(path: str, img: ImageRGB8) -> None:
    with open(path, 'wb') as f:
        f.write(encode_ppm(img))


def read_pgm(path: str) -> GrayMap:
    with open(path, 'rb') as f:
        return decode_pgm(f.read())


def write_pgm(path: str, gray: GrayMap) -> None:
    with open(path, 'wb') as f:
        f.write(encode_pgm(gray))
