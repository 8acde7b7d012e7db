"""Batch processing utilities for running independent trials"""

import asyncio
import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Any, Callable, List, Optional, Tuple


logger = logging.getLogger(__name__)


class BatchProcessor:
    """Run picklable jobs with bounded concurrency.

    With concurrency 1 jobs run in the calling process; otherwise they are
    dispatched to a process pool. Results keep the order of the inputs.
    """

    def __init__(self, batch_size: int = 16, concurrency: int = 1):
        """Initialize batch processor.

        Args:
            batch_size: Number of jobs submitted per batch
            concurrency: Maximum concurrent jobs (worker processes)
        """
        self.batch_size = max(1, batch_size)
        self.concurrency = max(1, concurrency)
        self.processed = 0
        self.failed = 0

    async def process_batch(
        self,
        items: List[Any],
        process_func: Callable,
        on_done: Optional[Callable[[Any], None]] = None,
        executor: Optional[Executor] = None,
    ) -> List[Tuple[bool, Any]]:
        """Apply process_func to every item.

        Args:
            items: Job arguments, one per call
            process_func: Module-level function taking one item
            on_done: Called with each (success, result) as it finishes
            executor: Pool to run jobs in; None runs them inline

        Returns:
            List of (success, result-or-error-message) in input order
        """
        loop = asyncio.get_running_loop()
        semaphore = asyncio.Semaphore(self.concurrency)

        async def run_one(item):
            async with semaphore:
                try:
                    if executor is None:
                        result = process_func(item)
                    else:
                        result = await loop.run_in_executor(executor, process_func, item)
                    self.processed += 1
                    outcome = (True, result)
                except Exception as e:
                    self.failed += 1
                    logger.error("Job failed: %s", e)
                    outcome = (False, str(e))
                if on_done is not None:
                    on_done(outcome)
                return outcome

        results = []
        for i in range(0, len(items), self.batch_size):
            batch = items[i:i + self.batch_size]
            logger.debug("Processing batch %d/%d (%d jobs)",
                         i // self.batch_size + 1, (len(items) - 1) // self.batch_size + 1, len(batch))
            results.extend(await asyncio.gather(*[run_one(item) for item in batch]))

        logger.info("Batch processing complete: %d succeeded, %d failed", self.processed, self.failed)
        return results


def process_in_batches(
    items: List[Any],
    process_func: Callable,
    batch_size: int = 16,
    concurrency: int = 1,
    on_done: Optional[Callable[[Any], None]] = None,
) -> List[Tuple[bool, Any]]:
    """Synchronous wrapper around BatchProcessor.process_batch.

    Args:
        items: Job arguments
        process_func: Module-level function taking one item
        batch_size: Jobs per batch
        concurrency: Worker processes; 1 runs inline
        on_done: Progress callback

    Returns:
        List of (success, result) tuples in input order
    """
    processor = BatchProcessor(batch_size, concurrency)
    if processor.concurrency == 1:
        return asyncio.run(processor.process_batch(items, process_func, on_done))
    with ProcessPoolExecutor(max_workers=processor.concurrency) as pool:
        return asyncio.run(processor.process_batch(items, process_func, on_done, pool))
