"""
Tests for the Error Handler system.
"""
import numpy as np
import pytest

from src.utils.error_handler import (
    ConfigurationError,
    DegreeCapExceeded,
    ErrorCategory,
    ErrorHandler,
    ErrorSeverity,
    ExpressionSyntaxError,
    Infeasible,
    NotInRegion,
    ShootFailed,
    WorkbenchError,
    exit_code_for
)


@pytest.fixture
def error_handler():
    return ErrorHandler(pattern_threshold=3)


@pytest.fixture
def sample_error_context():
    return {"component": "runge-demo", "operation": "approximate"}


class TestErrorHandler:
    def test_handle_error_basic(self, error_handler, sample_error_context):
        """Test basic error handling functionality."""
        # Arrange
        test_error = ValueError("Invalid input")

        # Act
        result = error_handler.handle_error(test_error, sample_error_context,
                                            severity=ErrorSeverity.MEDIUM)

        # Assert
        assert result["error_type"] == "ValueError"
        assert result["category"] == ErrorCategory.VALIDATION_ERROR.value
        assert result["severity"] == ErrorSeverity.MEDIUM.value
        assert result["context"] == sample_error_context
        assert "timestamp" in result
        assert "traceback" in result
        assert result["details"] == {}

    @pytest.mark.parametrize("error, category", [
        (NotInRegion("outside R_1"), ErrorCategory.VALIDATION_ERROR),
        (DegreeCapExceeded("cap"), ErrorCategory.NUMERICAL_ERROR),
        (ShootFailed("no orbit"), ErrorCategory.CONSTRUCTION_ERROR),
        (ConfigurationError("bad yaml"), ErrorCategory.CONFIGURATION_ERROR),
        (OverflowError("exp"), ErrorCategory.NUMERICAL_ERROR),
        (MemoryError(), ErrorCategory.RESOURCE_ERROR),
        (KeyError("map"), ErrorCategory.CONFIGURATION_ERROR),
        (RuntimeError("other"), ErrorCategory.SYSTEM_ERROR),
    ])
    def test_error_categorization(self, error_handler, error, category):
        """Test error categorization logic."""
        assert error_handler.handle_error(error, {})["category"] == category.value

    def test_details_are_reported(self, error_handler):
        """Test domain error details are made JSON-safe."""
        # Arrange
        error = Infeasible("detour does not fit", steps=40, radius=10.0, z=1 + 2j,
                           grid=np.zeros(2))

        # Act
        result = error_handler.handle_error(error, {"component": "oscillate"})

        # Assert
        assert result["details"]["steps"] == 40
        assert result["details"]["radius"] == 10.0
        assert result["details"]["z"] == [1.0, 2.0]
        assert isinstance(result["details"]["grid"], str)

    def test_error_pattern_detection(self, error_handler):
        """Test repeated errors of one type raise the severity."""
        # Act
        results = [error_handler.handle_error(ShootFailed("miss"), {}, ErrorSeverity.LOW)
                   for _ in range(4)]

        # Assert
        assert "pattern_detected" not in results[2]
        assert results[3]["pattern_detected"] is True
        assert results[3]["severity"] == ErrorSeverity.HIGH.value

    def test_error_summary(self, error_handler):
        """Test the per-type counts."""
        # Arrange
        error_handler.handle_error(ShootFailed("a"), {})
        error_handler.handle_error(ShootFailed("b"), {})
        error_handler.handle_error(ValueError("c"), {})

        # Act
        summary = error_handler.get_error_summary()

        # Assert
        assert summary == {"total_errors": 3, "by_type": {"ShootFailed": 2, "ValueError": 1},
                           "patterns_detected": False}


class TestExitCodes:
    @pytest.mark.parametrize("error, code", [
        (None, 0),
        (ConfigurationError("bad"), 2),
        (ExpressionSyntaxError("z +"), 2),
        (Infeasible("no"), 1),
        (WorkbenchError("generic"), 1),
    ])
    def test_exit_code_for(self, error, code):
        """Test CLI exit codes per error type."""
        assert exit_code_for(error) == code

    def test_details_kept_on_exception(self):
        """Test keyword details stay on the exception."""
        error = DegreeCapExceeded("degree cap reached", degree=512, sup_error=1e-3)

        assert str(error) == "degree cap reached"
        assert error.details == {"degree": 512, "sup_error": 1e-3}
