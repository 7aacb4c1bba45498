"""
Configuration Module

Centralized configuration management.
"""

import logging
import os
import sys
from typing import Optional

# Logging Configuration
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
LOG_FORMAT = os.getenv(
    'LOG_FORMAT',
    '%(asctime)s %(levelname)s %(name)s: %(message)s'
)

# Executor Configuration
DEFAULT_THREADS = int(os.getenv('STEREO_THREADS', '1'))
BANDS_PER_WORKER = int(os.getenv('STEREO_BANDS_PER_WORKER', '4'))

# Bench Configuration
BENCH_SEED = int(os.getenv('BENCH_SEED', '2019'))
BENCH_REPS = int(os.getenv('BENCH_REPS', '5'))
TARGET_FPS = float(os.getenv('TARGET_FPS', '25.0'))  # real-time reference

# Conversion defaults
DEFAULT_POP_THRESHOLD = 150
DEFAULT_SIGMA_SPATIAL = 8.0
DEFAULT_SIGMA_RANGE = 16.0
DEFAULT_DEPTH_BLOCK = 16
DEFAULT_INPAINT_BLOCK = 64
DEFAULT_ALPHA = 0.7
DEFAULT_BETA = 0.3
BASE_DIVISOR = 256  # B = 2 * round(width / BASE_DIVISOR)
FALLBACK_GRAY = 128


def setup_logging(level: Optional[str] = None) -> None:
    """Install a single stderr handler on the root logger."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel((level or LOG_LEVEL).upper())
