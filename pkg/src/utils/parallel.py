"""
Index-ordered fan-out over worker processes.

Results come back in submission order, so output never depends on the
worker count or on which worker finished first.
"""
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar
import logging

from config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit count wins, else HENON_WORKERS, else the CPU count."""
    if workers is not None and workers > 0:
        return workers
    return settings.worker_count()


def chunk_ranges(total: int, chunk_size: int) -> List[range]:
    """Split ``range(total)`` into consecutive chunks."""
    chunk_size = max(1, chunk_size)
    return [range(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def ordered_map(func: Callable[[T], R], tasks: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """Apply ``func`` to every task, returning results in task order."""
    count = resolve_workers(workers)
    if count == 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    logger.debug("fan-out", extra={"tasks": len(tasks), "workers": count})
    with ProcessPoolExecutor(max_workers=count) as pool:
        return list(pool.map(func, tasks))
