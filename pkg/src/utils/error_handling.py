"""
Error Handling for fkrylov

This module provides the structured error hierarchy shared by the numerical
core, the file readers and the command line front end.

Features:
- Hierarchical error classification (category + severity)
- Error context preservation (operation, file, line number)
- Conversion of foreign numerical exceptions into the hierarchy
- Console reporting for the CLI
- Category to exit-code mapping
"""

import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterator, Optional

logger = logging.getLogger(__name__)


class ErrorSeverity(Enum):
    """Error severity levels for classification and handling."""
    ERROR = "error"           # Operation failed
    WARNING = "warning"       # Result usable with caveats


class ErrorCategory(Enum):
    """Error categories, used for reporting and exit codes."""
    VALIDATION = "validation"       # Bad arguments, dimension mismatch, size guards
    PARSE = "parse"                 # Malformed matrix or CSV files
    CONVERGENCE = "convergence"     # Iterations that fail to converge
    BRANCH = "branch"               # Matrix square root off its principal branch
    RESOURCE = "resource"           # Memory constraints
    CONFIGURATION = "configuration" # Invalid run configuration
    FILESYSTEM = "filesystem"       # File access
    UNKNOWN = "unknown"


# Exit codes of the command line front end
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COMPUTATION = 2
EXIT_CHECK_FAILED = 3


@dataclass
class ErrorContext:
    """Context information for error handling."""
    operation: str
    file_path: Optional[Path] = None
    line_number: Optional[int] = None


class FrechetError(Exception):
    """
    Base exception class carrying category, severity and context.
    """

    def __init__(self,
                 message: str,
                 category: ErrorCategory = ErrorCategory.UNKNOWN,
                 severity: ErrorSeverity = ErrorSeverity.ERROR,
                 context: Optional[ErrorContext] = None,
                 original_exception: Optional[BaseException] = None):
        super().__init__(message)
        self.message = message
        self.category = category
        self.severity = severity
        self.context = context or ErrorContext(operation="unknown")
        self.original_exception = original_exception

    def __str__(self) -> str:
        return f"[{self.severity.value.upper()}|{self.category.value}] {self.message}"

    @property
    def exit_code(self) -> int:
        """Exit code of the CLI when this error ends a command."""
        if self.category in (ErrorCategory.VALIDATION, ErrorCategory.CONFIGURATION):
            return EXIT_USAGE
        return EXIT_COMPUTATION


class ValidationError(FrechetError):
    """Argument, dimension and size-guard errors."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(message, ErrorCategory.VALIDATION, **kwargs)


class ParseError(FrechetError):
    """Malformed input files. Carries the offending line when known."""

    def __init__(self, message: str, path: Optional[Path] = None,
                 line_number: Optional[int] = None, **kwargs: Any):
        if line_number is not None:
            message = f"{message} (line {line_number})"
        super().__init__(message, ErrorCategory.PARSE, **kwargs)
        self.path = Path(path) if path is not None else None
        self.line_number = line_number
        self.context.file_path = self.path
        self.context.line_number = line_number


class ConvergenceError(FrechetError):
    """Iterations that did not reach their tolerance."""

    def __init__(self, message: str, category: ErrorCategory = ErrorCategory.CONVERGENCE,
                 **kwargs: Any):
        super().__init__(message, category, **kwargs)


class BranchError(ConvergenceError):
    """Square root iteration left the principal branch or failed its residual check."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(message, ErrorCategory.BRANCH, **kwargs)


class ResourceError(FrechetError):
    """Resource constraint errors."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(message, ErrorCategory.RESOURCE, **kwargs)


class ConfigurationError(FrechetError):
    """Configuration related errors."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(message, ErrorCategory.CONFIGURATION, **kwargs)


class ConsoleErrorReporter:
    """Console-based error reporter."""

    def __init__(self, use_colors: bool = True):
        self.use_colors = use_colors and self._supports_colors()
        self.colors = {
            ErrorSeverity.ERROR: '\033[91m',    # Red
            ErrorSeverity.WARNING: '\033[93m',  # Yellow
            'reset': '\033[0m'
        }

    def _supports_colors(self) -> bool:
        """Check if terminal supports colors."""
        return (hasattr(sys.stderr, 'isatty') and sys.stderr.isatty() and
                os.name != 'nt') or os.getenv('FORCE_COLOR', '').lower() in ('1', 'true', 'yes')

    def report_error(self, error: FrechetError) -> None:
        """Report an error to the console."""
        color = self.colors.get(error.severity, '') if self.use_colors else ''
        reset = self.colors['reset'] if self.use_colors else ''

        icon = {
            ErrorSeverity.ERROR: '❌',
            ErrorSeverity.WARNING: '⚠️',
        }.get(error.severity, '❓')

        print(f"{color}{icon} {error}{reset}", file=sys.stderr)

        context = error.context
        if context.file_path:
            location = f"{context.file_path}"
            if context.line_number is not None:
                location += f":{context.line_number}"
            print(f"   📁 File: {location}", file=sys.stderr)
        if context.operation and context.operation != "unknown":
            print(f"   🔧 Operation: {context.operation}", file=sys.stderr)


@contextmanager
def error_context(operation: str,
                  category: ErrorCategory = ErrorCategory.UNKNOWN,
                  error_type: Optional[Callable[..., FrechetError]] = None,
                  **context_kwargs: Any) -> Iterator[ErrorContext]:
    """
    Context manager for error handling with automatic context capture.

    Args:
        operation: Description of the operation being performed
        category: Category used when a foreign exception is converted
        error_type: Optional FrechetError subclass used for conversion
        **context_kwargs: Additional context information
    """
    context = ErrorContext(operation=operation, **context_kwargs)

    try:
        yield context
    except FrechetError as e:
        if e.context.operation == "unknown":
            e.context = context
        raise
    except Exception as e:
        message = f"{operation} failed: {e}"
        if error_type is not None:
            raise error_type(message, context=context, original_exception=e) from e
        raise FrechetError(
            message=message,
            category=category,
            context=context,
            original_exception=e
        ) from e


# Convenience functions for common error types
def validation_error(message: str, **kwargs: Any) -> ValidationError:
    """Create a validation error."""
    return ValidationError(message, **kwargs)


def parse_error(message: str, path: Optional[Path] = None,
                line_number: Optional[int] = None, **kwargs: Any) -> ParseError:
    """Create a parse error with file and line context."""
    return ParseError(message, path=path, line_number=line_number, **kwargs)


def resource_error(message: str, **kwargs: Any) -> ResourceError:
    """Create a resource error."""
    return ResourceError(message, **kwargs)


def config_error(message: str, **kwargs: Any) -> ConfigurationError:
    """Create a configuration error."""
    return ConfigurationError(message, **kwargs)
