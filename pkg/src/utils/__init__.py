"""
Utilities Package

Common utility modules for fkrylov.

Available modules:
- error_handling: Structured error hierarchy, context capture and console reporting
"""

from .error_handling import (
    ErrorSeverity, ErrorCategory, ErrorContext,
    FrechetError, ValidationError, ParseError, ConvergenceError, BranchError,
    ResourceError, ConfigurationError,
    ConsoleErrorReporter,
    error_context,
    validation_error, parse_error, resource_error, config_error,
    EXIT_OK, EXIT_USAGE, EXIT_COMPUTATION, EXIT_CHECK_FAILED,
)

__all__ = [
    # Enums
    'ErrorSeverity', 'ErrorCategory',

    # Data classes
    'ErrorContext',

    # Exceptions
    'FrechetError', 'ValidationError', 'ParseError', 'ConvergenceError', 'BranchError',
    'ResourceError', 'ConfigurationError',

    # Classes
    'ConsoleErrorReporter',

    # Context managers
    'error_context',

    # Factory functions
    'validation_error', 'parse_error', 'resource_error', 'config_error',

    # Exit codes
    'EXIT_OK', 'EXIT_USAGE', 'EXIT_COMPUTATION', 'EXIT_CHECK_FAILED',
]
