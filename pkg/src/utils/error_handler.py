"""
Centralized error handling for the Hénon workbench.

Domain failures are raised as ``WorkbenchError`` subclasses. Numerical
overflow is never raised; it travels as a flag on results.
"""
from typing import Any, Dict, Optional
import logging
import traceback
from datetime import datetime
from enum import Enum

logger = logging.getLogger(__name__)


class ErrorSeverity(Enum):
    """Error severity levels."""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Error categories for classification."""
    VALIDATION_ERROR = "validation_error"
    NUMERICAL_ERROR = "numerical_error"
    CONSTRUCTION_ERROR = "construction_error"
    CONFIGURATION_ERROR = "configuration_error"
    RESOURCE_ERROR = "resource_error"
    SYSTEM_ERROR = "system_error"


class WorkbenchError(Exception):
    """Base class for domain errors. ``details`` is attached to reports."""

    category = ErrorCategory.SYSTEM_ERROR

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details: Dict[str, Any] = details


class ExpressionSyntaxError(WorkbenchError):
    category = ErrorCategory.VALIDATION_ERROR


class ConfigurationError(WorkbenchError):
    category = ErrorCategory.CONFIGURATION_ERROR


class NotInRegion(WorkbenchError):
    category = ErrorCategory.VALIDATION_ERROR


class DeltaTooLarge(WorkbenchError):
    category = ErrorCategory.VALIDATION_ERROR


class SameBasin(WorkbenchError):
    category = ErrorCategory.NUMERICAL_ERROR


class DisksOverlap(WorkbenchError):
    category = ErrorCategory.VALIDATION_ERROR


class DegreeCapExceeded(WorkbenchError):
    """Carries the best approximant found under ``details['best']``."""
    category = ErrorCategory.NUMERICAL_ERROR


class IllConditioned(WorkbenchError):
    category = ErrorCategory.NUMERICAL_ERROR


class ResonanceDetected(WorkbenchError):
    category = ErrorCategory.NUMERICAL_ERROR


class ResidualTooLarge(WorkbenchError):
    category = ErrorCategory.NUMERICAL_ERROR


class ShootFailed(WorkbenchError):
    category = ErrorCategory.CONSTRUCTION_ERROR


class Infeasible(WorkbenchError):
    category = ErrorCategory.CONSTRUCTION_ERROR


class ErrorHandler:
    def __init__(self, pattern_threshold: int = 10):
        """
        Initialize error handler.

        Args:
            pattern_threshold: Number of same-type errors after which a
                pattern is flagged
        """
        self.pattern_threshold = pattern_threshold
        self.error_patterns: Dict[str, int] = {}

    def handle_error(
        self,
        error: Exception,
        context: Dict,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM
    ) -> Dict:
        """Handle and log an error, returning its structured record."""
        category = self._categorize_error(error)

        error_info = {
            "timestamp": datetime.now().isoformat(),
            "error_type": type(error).__name__,
            "category": category.value,
            "severity": severity.value,
            "message": str(error),
            "traceback": traceback.format_exc(),
            "context": context,
            "details": _jsonable(getattr(error, "details", {}))
        }

        self._update_error_pattern(error_info)
        if self._check_error_pattern(error_info):
            error_info["pattern_detected"] = True
            error_info["severity"] = ErrorSeverity.HIGH.value

        logger.error(
            f"Error in {context.get('component', 'unknown')}: {str(error)}",
            extra={"error_type": error_info["error_type"],
                   "category": error_info["category"],
                   "severity": error_info["severity"]}
        )
        return error_info

    def _categorize_error(self, error: Exception) -> ErrorCategory:
        """Categorize the error type."""
        if isinstance(error, WorkbenchError):
            return error.category
        elif isinstance(error, (ValueError, TypeError)):
            return ErrorCategory.VALIDATION_ERROR
        elif isinstance(error, (ArithmeticError, FloatingPointError)):
            return ErrorCategory.NUMERICAL_ERROR
        elif isinstance(error, (MemoryError, OSError)):
            return ErrorCategory.RESOURCE_ERROR
        elif isinstance(error, KeyError):
            return ErrorCategory.CONFIGURATION_ERROR
        return ErrorCategory.SYSTEM_ERROR

    def _update_error_pattern(self, error_info: Dict) -> None:
        """Update error pattern tracking."""
        error_type = error_info["error_type"]
        self.error_patterns[error_type] = self.error_patterns.get(error_type, 0) + 1

    def _check_error_pattern(self, error_info: Dict) -> bool:
        """Check for repeated errors of one type."""
        return self.error_patterns.get(error_info["error_type"], 0) > self.pattern_threshold

    def get_error_summary(self) -> Dict[str, Any]:
        """Summary of errors seen by this handler."""
        return {
            "total_errors": sum(self.error_patterns.values()),
            "by_type": dict(self.error_patterns),
            "patterns_detected": any(
                count > self.pattern_threshold for count in self.error_patterns.values()
            )
        }


def _jsonable(details: Dict[str, Any]) -> Dict[str, Any]:
    """Keep only values a JSON report can carry."""
    out: Dict[str, Any] = {}
    for key, value in details.items():
        if isinstance(value, (str, int, float, bool)) or value is None:
            out[key] = value
        elif isinstance(value, complex):
            out[key] = [value.real, value.imag]
        else:
            out[key] = repr(value)
    return out


def exit_code_for(error: Optional[Exception]) -> int:
    """CLI exit code: 0 success, 2 usage/configuration, 1 anything else."""
    if error is None:
        return 0
    if isinstance(error, (ConfigurationError, ExpressionSyntaxError)):
        return 2
    return 1
