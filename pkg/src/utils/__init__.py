"""
Utility package: error handling, performance monitoring and ordered fan-out.
"""
from .error_handler import ErrorHandler, ErrorSeverity, ErrorCategory, WorkbenchError
from .performance_monitor import PerformanceMonitor
from .parallel import ordered_map, resolve_workers

__all__ = [
    'ErrorHandler', 'ErrorSeverity', 'ErrorCategory', 'WorkbenchError',
    'PerformanceMonitor', 'ordered_map', 'resolve_workers'
]
