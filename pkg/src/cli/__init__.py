"""
Command line front end: command implementations, the self-check suite and
SVG rendering of the CSV results.
"""

from .commands import (
    Method, RunConfig, cmd_check, cmd_convergence, cmd_heat_fit, cmd_sensitivity, write_csv,
)
from .plotting import emit_plot

__all__ = [
    'Method', 'RunConfig',
    'cmd_convergence', 'cmd_sensitivity', 'cmd_heat_fit', 'cmd_check',
    'write_csv', 'emit_plot',
]
