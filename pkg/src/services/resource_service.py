"""
Resource Service

Memory checks for the dense reference computations:
- Footprint estimates for dense n x n and embedded 2n x 2n work
- Comparison against available memory with a safety fraction
- Refusal with a ResourceError before allocation
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import psutil

from ..utils.error_handling import resource_error

logger = logging.getLogger(__name__)

# Dense matrix function kernels keep roughly this many work matrices alive
DENSE_WORK_MATRICES = 8
DEFAULT_SAFETY_FRACTION = 0.5


@dataclass
class MemoryEstimate:
    """Estimated footprint of a dense computation."""
    required_bytes: int
    available_bytes: int
    safety_fraction: float

    @property
    def is_sufficient(self) -> bool:
        return self.required_bytes <= self.available_bytes * self.safety_fraction

    @property
    def required_mb(self) -> float:
        return self.required_bytes / (1024 * 1024)

    @property
    def available_mb(self) -> float:
        return self.available_bytes / (1024 * 1024)


class MemoryGuard:
    """
    Refuses dense work whose footprint exceeds a fraction of available memory.
    """

    def __init__(self, safety_fraction: float = DEFAULT_SAFETY_FRACTION,
                 available_bytes: Optional[int] = None):
        """
        Args:
            safety_fraction: Share of available memory dense work may use
            available_bytes: Fixed budget, bypassing psutil (for tests)
        """
        self.safety_fraction = safety_fraction
        self._available_override = available_bytes

    def available_bytes(self) -> int:
        if self._available_override is not None:
            return self._available_override
        return int(psutil.virtual_memory().available)

    def estimate_dense(self, size: int, complex_valued: bool = False,
                       matrices: int = DENSE_WORK_MATRICES) -> MemoryEstimate:
        """Footprint of `matrices` dense size x size arrays."""
        itemsize = np.dtype(complex if complex_valued else float).itemsize
        required = int(matrices) * size * size * itemsize
        return MemoryEstimate(required, self.available_bytes(), self.safety_fraction)

    def require_dense(self, size: int, complex_valued: bool = False,
                      operation: str = "dense computation") -> MemoryEstimate:
        """
        Check a dense size x size computation, raising if it does not fit.

        Raises:
            ResourceError: Estimated footprint exceeds the budget
        """
        estimate = self.estimate_dense(size, complex_valued)
        if not estimate.is_sufficient:
            raise resource_error(
                f"{operation} of size {size} needs about {estimate.required_mb:.1f} MB, "
                f"only {estimate.available_mb * self.safety_fraction:.1f} MB may be used"
            )
        logger.debug(f"{operation}: {estimate.required_mb:.1f} MB of "
                     f"{estimate.available_mb:.1f} MB available")
        return estimate


_default_guard: Optional[MemoryGuard] = None


def get_memory_guard() -> MemoryGuard:
    """Shared guard instance."""
    global _default_guard
    if _default_guard is None:
        _default_guard = MemoryGuard()
    return _default_guard
