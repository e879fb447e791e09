"""
Progress Reporting Service

Progress reporting for long numerical runs:
- Named steps (one per method in a convergence sweep, one per fitting run)
- tqdm bars over Krylov steps or descent iterations
- Console start/complete/fail lines
"""

import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Dict, Optional

from tqdm import tqdm

logger = logging.getLogger(__name__)


@dataclass
class ProgressStep:
    """Information about a progress step."""
    name: str
    description: str
    current: int = 0
    total: int = 0
    start_time: Optional[datetime] = None
    end_time: Optional[datetime] = None
    status: str = "pending"  # pending, running, completed, failed

    @property
    def progress_percent(self) -> float:
        if self.total == 0:
            return 0.0
        return min(100.0, (self.current / self.total) * 100.0)

    @property
    def elapsed_time(self) -> timedelta:
        if not self.start_time:
            return timedelta(0)
        end_time = self.end_time or datetime.now()
        return end_time - self.start_time


class ProgressReporter:
    """
    Step-based progress reporting with tqdm bars and console lines.
    """

    def __init__(self, show_progress: bool = True, verbose: bool = False):
        """
        Args:
            show_progress: Show progress bars and status lines
            verbose: Show per-update messages
        """
        self.show_progress = show_progress
        self.verbose = verbose
        self.steps: Dict[str, ProgressStep] = {}
        self.progress_bars: Dict[str, tqdm] = {}
        self._lock = threading.Lock()

    def start_step(self, step_name: str, total_items: int = 0, message: str = "",
                   description: Optional[str] = None, unit: str = "steps") -> None:
        """
        Start a step.

        Args:
            step_name: Step identifier
            total_items: Number of units (Krylov steps, iterations) in this step
            message: Initial status text
            description: Display name (defaults to step_name)
            unit: tqdm unit label
        """
        with self._lock:
            step = self.steps.setdefault(step_name, ProgressStep(step_name, description or step_name))
            step.status = "running"
            step.start_time = datetime.now()
            step.total = total_items
            step.current = 0

        if self.show_progress and total_items > 0:
            self.progress_bars[step_name] = tqdm(
                total=total_items,
                desc=step.description,
                unit=unit,
                ncols=80,
                leave=False,
            )

        if self.show_progress:
            suffix = f": {message}" if message else ""
            print(f"🔄 {step.description}{suffix}")

        logger.debug(f"step {step_name} started: {total_items} {unit}")

    def update_step(self, step_name: str, current: int, message: str = "") -> None:
        with self._lock:
            if step_name not in self.steps:
                return
            step = self.steps[step_name]
            step.current = current

        if step_name in self.progress_bars:
            bar = self.progress_bars[step_name]
            bar.n = current
            if message:
                bar.set_postfix_str(message)
            bar.refresh()

        if self.verbose and message:
            print(f"  📊 {step.progress_percent:.1f}% - {message}")

    def complete_step(self, step_name: str, message: str = "") -> None:
        with self._lock:
            if step_name not in self.steps:
                return
            step = self.steps[step_name]
            step.status = "completed"
            step.end_time = datetime.now()
            step.current = step.total

        self._close_bar(step_name)
        if self.show_progress:
            suffix = f": {message}" if message else " completed"
            print(f"✅ {step.description}{suffix} ({step.elapsed_time})")
        logger.debug(f"step {step_name} completed in {step.elapsed_time}")

    def fail_step(self, step_name: str, error_message: str) -> None:
        with self._lock:
            if step_name not in self.steps:
                return
            step = self.steps[step_name]
            step.status = "failed"
            step.end_time = datetime.now()

        self._close_bar(step_name)
        if self.show_progress:
            print(f"❌ {step.description} failed: {error_message}")
        logger.debug(f"step {step_name} failed at {step.current}/{step.total}: {error_message}")

    def _close_bar(self, step_name: str) -> None:
        bar = self.progress_bars.pop(step_name, None)
        if bar is not None:
            bar.close()

    def close(self) -> None:
        """Close all progress bars."""
        with self._lock:
            for bar in self.progress_bars.values():
                bar.close()
            self.progress_bars.clear()


def create_progress_reporter(show_progress: bool = True, verbose: bool = False) -> ProgressReporter:
    """Factory for a configured progress reporter."""
    return ProgressReporter(show_progress=show_progress, verbose=verbose)
