"""Utilities for the ranking toolkit."""

from .log import configure_logging
from .parallel import default_threads, parallel_map
from .progress import ProgressReporter, create_reporter
from .rng import derive_seed, draw_seed, make_rng

__all__ = [
    "ProgressReporter",
    "configure_logging",
    "create_reporter",
    "default_threads",
    "derive_seed",
    "draw_seed",
    "make_rng",
    "parallel_map",
]
