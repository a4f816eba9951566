"""
Batch Runner - Runs independent units of numerical work (one eigensolve per
epsilon) with bounded concurrency and progress reporting.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence

logger = logging.getLogger(__name__)

DEFAULT_MAX_CONCURRENT = 2


@dataclass
class JobProgress:
    """Tracks progress of a batch."""
    total: int
    completed: int = 0
    successful: int = 0
    failed: int = 0


@dataclass
class JobResult:
    """Final result of a batch; `results` follows the order of the items."""
    total: int
    successful: int
    failed: int
    duration_ms: int
    results: List[dict]

    @property
    def failures(self) -> List[dict]:
        return [r for r in self.results if not r.get('success')]


def run_batch(
    work: Callable[[Any], Any],
    items: Sequence[Any],
    max_concurrent: int = DEFAULT_MAX_CONCURRENT,
    on_progress: Optional[Callable[[JobProgress], None]] = None,
    stop_event: Optional[threading.Event] = None,
    label: str = 'unit'
) -> JobResult:
    """
    Run `work(item)` for every item.

    Args:
        work: Callable doing one unit of work
        items: Inputs, e.g. the epsilon schedule
        max_concurrent: Worker threads (LAPACK releases the GIL)
        on_progress: Optional callback for progress updates
        stop_event: Optional event; units not yet started are skipped

    Returns:
        JobResult with one entry per item, in item order
    """
    progress = JobProgress(total=len(items))
    lock = threading.Lock()
    start_time = time.time()

    logger.info(f"Starting batch: {len(items)} {label}s, concurrency={max_concurrent}")

    def run_unit(item: Any) -> dict:
        if stop_event and stop_event.is_set():
            return {'success': False, 'item': item, 'error': 'stopped', 'skipped': True}

        unit_start = time.time()
        try:
            value = work(item)
            result = {'success': True, 'item': item, 'value': value}
        except Exception as e:
            logger.error(f"{label} {item} failed: {e}")
            result = {'success': False, 'item': item, 'error': str(e), 'exception': e}
        result['duration'] = int((time.time() - unit_start) * 1000)

        with lock:
            progress.completed += 1
            if result['success']:
                progress.successful += 1
            else:
                progress.failed += 1
            if on_progress:
                on_progress(progress)
        return result

    with ThreadPoolExecutor(max_workers=max(1, max_concurrent)) as pool:
        results = list(pool.map(run_unit, items))

    duration_ms = int((time.time() - start_time) * 1000)
    logger.info(
        f"Batch complete: {progress.successful}/{progress.total} successful "
        f"in {duration_ms}ms"
    )

    return JobResult(
        total=progress.total,
        successful=progress.successful,
        failed=progress.failed,
        duration_ms=duration_ms,
        results=results,
    )
