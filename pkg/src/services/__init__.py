"""
Services Package

Support services for the numerical core:
- progress_reporting_service: Named steps with tqdm bars
- resource_service: Memory guard for dense reference computations
"""

from .progress_reporting_service import ProgressReporter, create_progress_reporter
from .resource_service import MemoryEstimate, MemoryGuard, get_memory_guard

__all__ = [
    'ProgressReporter', 'create_progress_reporter',
    'MemoryEstimate', 'MemoryGuard', 'get_memory_guard',
]
