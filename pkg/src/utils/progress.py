"""Progress reporting for multi-stage pipeline commands."""

import logging
import time
from typing import Optional

from tqdm import tqdm

logger = logging.getLogger(__name__)


class ProgressReporter:
    """Reports stage-by-stage progress of a CLI command.

    Each stage gets its own tqdm bar counting work items (images, pairs,
    epochs); stage completion is logged with its wall time.
    """

    def __init__(self, total_stages: int, verbose: bool = False):
        """Initialize the reporter.

        Args:
            total_stages: Number of stages the command runs.
            verbose: Log per-stage timings at INFO instead of DEBUG.
        """
        self.total_stages = total_stages
        self.verbose = verbose
        self.current_stage = 0
        self.stage_name = ""
        self.stage_start_time = 0.0
        self._bar: Optional[tqdm] = None

    def start_stage(self, name: str, total: Optional[int] = None, unit: str = "it") -> None:
        """Open the bar for the next stage."""
        self.close()
        self.current_stage += 1
        self.stage_name = name
        self.stage_start_time = time.time()
        self._bar = tqdm(
            total=total,
            desc=f"Stage {self.current_stage}/{self.total_stages}: {name}",
            unit=unit,
            leave=False,
            ncols=80,
        )

    def update(self, amount: int = 1) -> None:
        """Advance the current stage."""
        if self._bar is not None:
            self._bar.update(amount)

    def set_postfix(self, **values) -> None:
        """Show running values (loss, accuracy, ...) next to the bar."""
        if self._bar is not None:
            self._bar.set_postfix(**values, refresh=False)

    def complete_stage(self) -> float:
        """Close the current stage and return its duration in seconds."""
        self.close()
        elapsed = time.time() - self.stage_start_time
        level = logging.INFO if self.verbose else logging.DEBUG
        logger.log(level, "%s: completed in %.2fs", self.stage_name, elapsed)
        return elapsed

    def close(self) -> None:
        """Clean up the open progress bar."""
        if self._bar is not None:
            self._bar.close()
            self._bar = None


def create_reporter(
    total_stages: int, verbose: bool = False, quiet: bool = False
) -> Optional[ProgressReporter]:
    """Create a progress reporter, or None when quiet."""
    if quiet:
        return None
    return ProgressReporter(total_stages=total_stages, verbose=verbose)
