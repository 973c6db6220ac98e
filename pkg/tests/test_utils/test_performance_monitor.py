"""
Tests for the Performance Monitor system.
"""
import time
from datetime import datetime

import pytest

from src.utils.performance_monitor import PerformanceMonitor


@pytest.fixture
def performance_monitor():
    return PerformanceMonitor()


class TestPerformanceMonitor:
    def test_start_operation_tracking(self, performance_monitor):
        """Test starting operation tracking."""
        # Act
        performance_monitor.start_operation("render_1", "render", items=256)

        # Assert
        metrics = performance_monitor.metrics["render_1"]
        assert metrics["type"] == "render"
        assert metrics["items"] == 256
        assert isinstance(metrics["start_time"], datetime)
        assert "memory_start" in metrics

    def test_end_operation_metrics(self, performance_monitor):
        """Test operation completion metrics."""
        # Arrange
        performance_monitor.start_operation("sweep_1", "sweep", items=100)
        time.sleep(0.01)

        # Act
        result = performance_monitor.end_operation("sweep_1")

        # Assert
        assert result["status"] == "success"
        assert result["duration"] > 0
        assert result["throughput"] == pytest.approx(100 / result["duration"])
        assert "memory_used" in result
        assert "warnings" in result

    def test_unknown_operation(self, performance_monitor):
        """Test ending an operation that never started."""
        with pytest.raises(ValueError):
            performance_monitor.end_operation("missing")

    def test_track_context(self, performance_monitor):
        """Test the context manager yields the live metrics dict."""
        # Act
        with performance_monitor.track("render", items=10) as metrics:
            time.sleep(0.01)

        # Assert
        assert metrics["status"] == "success"
        assert metrics["duration"] > 0

    def test_track_marks_errors(self, performance_monitor):
        """Test an exception inside track() is recorded and re-raised."""
        # Act
        with pytest.raises(RuntimeError):
            with performance_monitor.track("render", items=10):
                raise RuntimeError("boom")

        # Assert
        assert performance_monitor.summary("render")["success_rate"] == 0.0

    def test_low_throughput_warning(self):
        """Test a throughput floor produces a warning."""
        # Arrange
        monitor = PerformanceMonitor(throughput_warning=1e12)

        # Act
        with monitor.track("render", items=10) as metrics:
            time.sleep(0.01)

        # Assert
        assert any("Low throughput" in w for w in metrics["warnings"])

    def test_summary(self, performance_monitor):
        """Test the summary over finished operations."""
        # Arrange
        for _ in range(2):
            with performance_monitor.track("sweep", items=5):
                time.sleep(0.005)
        performance_monitor.start_operation("unfinished", "sweep")

        # Act
        summary = performance_monitor.summary("sweep")

        # Assert
        assert summary["total_operations"] == 2
        assert summary["success_rate"] == 100.0
        assert summary["average_duration"] > 0
        assert performance_monitor.summary("other") == {"total_operations": 0}
