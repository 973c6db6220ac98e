"""
Performance monitoring for the workbench sweeps and renderer.
"""
from typing import Dict, Iterator, List, Optional, Any
import logging
from contextlib import contextmanager
from datetime import datetime

import psutil

logger = logging.getLogger(__name__)


class PerformanceMonitor:
    def __init__(self, throughput_warning: Optional[float] = None):
        """
        Initialize performance monitor.

        Args:
            throughput_warning: items/second below which a warning is logged
        """
        self.metrics: Dict[str, Dict[str, Any]] = {}
        self.thresholds = {
            "memory_warning": 85.0,  # 85% memory usage
            "duration_warning": 300.0,  # 5 minutes
            "throughput_warning": throughput_warning
        }

    @contextmanager
    def track(self, operation_name: str, items: int = 0) -> Iterator[Dict[str, Any]]:
        """Context manager for tracking an operation; yields its metrics dict."""
        operation_id = f"{operation_name}_{datetime.now().isoformat()}"
        self.start_operation(operation_id, operation_name, items)
        status = "success"
        try:
            yield self.metrics[operation_id]
        except Exception:
            status = "error"
            raise
        finally:
            self.end_operation(operation_id, status)

    def start_operation(self, operation_id: str, operation_type: str, items: int = 0) -> None:
        """Start tracking an operation."""
        process = psutil.Process()
        self.metrics[operation_id] = {
            "type": operation_type,
            "items": items,
            "start_time": datetime.now(),
            "memory_start": process.memory_info().rss
        }

    def end_operation(self, operation_id: str, status: str = "success") -> Dict[str, Any]:
        """End tracking an operation and return metrics."""
        if operation_id not in self.metrics:
            raise ValueError(f"Unknown operation ID: {operation_id}")

        metrics = self.metrics[operation_id]
        end_time = datetime.now()
        duration = (end_time - metrics["start_time"]).total_seconds()
        metrics.update({
            "end_time": end_time,
            "duration": duration,
            "memory_end": psutil.Process().memory_info().rss,
            "status": status
        })
        metrics["memory_used"] = metrics["memory_end"] - metrics["memory_start"]
        metrics["throughput"] = metrics["items"] / duration if duration > 0 and metrics["items"] else 0.0

        self._check_thresholds(metrics)
        return metrics

    def _check_thresholds(self, metrics: Dict[str, Any]) -> None:
        """Check if metrics exceed warning thresholds."""
        warnings: List[str] = []

        memory_percent = psutil.virtual_memory().percent
        if memory_percent > self.thresholds["memory_warning"]:
            warnings.append(f"High memory usage: {memory_percent}%")

        if metrics["duration"] > self.thresholds["duration_warning"]:
            warnings.append(f"Long operation duration: {metrics['duration']} seconds")

        limit = self.thresholds["throughput_warning"]
        if limit and metrics["items"] and metrics["throughput"] < limit:
            warnings.append(f"Low throughput: {metrics['throughput']:.0f} items/s")

        metrics["warnings"] = warnings
        if warnings:
            logger.warning(f"Performance warnings for {metrics['type']}: {warnings}")

    def summary(self, operation_type: Optional[str] = None) -> Dict[str, Any]:
        """Summary of tracked operations, optionally for one type."""
        rows = [m for m in self.metrics.values()
                if "duration" in m and (operation_type is None or m["type"] == operation_type)]
        if not rows:
            return {"total_operations": 0}
        return {
            "total_operations": len(rows),
            "average_duration": sum(m["duration"] for m in rows) / len(rows),
            "average_throughput": sum(m["throughput"] for m in rows) / len(rows),
            "success_rate": 100.0 * sum(1 for m in rows if m["status"] == "success") / len(rows)
        }
