"""Logging setup for the command-line tool."""

import logging
import os

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"
LOG_LEVEL_ENV = "UGCRANK_LOG_LEVEL"


def configure_logging(verbose: bool = False, quiet: bool = False) -> int:
    """Install a single stderr handler on the ``src`` logger tree.

    Args:
        verbose: DEBUG level.
        quiet: ERROR level (wins over ``verbose``).

    Returns:
        The effective level.
    """
    if quiet:
        level = logging.ERROR
    elif verbose:
        level = logging.DEBUG
    else:
        name = os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
        level = logging.getLevelName(name)
        if not isinstance(level, int):
            level = logging.INFO

    root = logging.getLogger("src")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt="%H:%M:%S"))
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False
    return level
