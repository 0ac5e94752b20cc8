"""
Bounded-worker evaluation service.

Search loops reserve budget, submit a genotype and await its result. In
concurrent mode submissions wait in a FIFO queue and ``workers`` consumer
tasks evaluate them in background threads. In deterministic mode every
evaluation runs inline, followed by a yield to the event loop, so the loops
advance in round-robin order and a run is reproducible bit for bit.
"""

import asyncio
import logging
import time
from typing import Callable, List, Optional, Sequence

from ..phenotype import EvalResult

logger = logging.getLogger(__name__)

EvaluateFn = Callable[[Sequence[int]], EvalResult]


class EvaluationService:
    """Evaluation queue with budget and wall-clock accounting.

    Args:
        evaluate_fn: blocking genotype evaluation
        budget: maximum number of reservations (skipped evaluations included)
        workers: number of concurrent evaluations
        deterministic: evaluate inline on the event loop
        time_limit: seconds after :meth:`start` when reservations stop
    """

    def __init__(self, evaluate_fn: EvaluateFn, budget: int, workers: int = 1,
                 deterministic: bool = False, time_limit: Optional[float] = None,
                 clock: Callable[[], float] = time.monotonic):
        self.evaluate_fn = evaluate_fn
        self.budget = budget
        self.workers = 1 if deterministic else max(1, workers)
        self.deterministic = deterministic
        self.time_limit = time_limit
        self.clock = clock
        self.reserved = 0
        self.fresh = 0
        self.timed_out = False
        self._started_at: Optional[float] = None
        self._queue: Optional[asyncio.Queue] = None
        self._tasks: List[asyncio.Task] = []

    async def __aenter__(self) -> "EvaluationService":
        await self.start()
        return self

    async def __aexit__(self, *exc) -> None:
        await self.stop()

    async def start(self) -> None:
        self._started_at = self.clock()
        if self.deterministic:
            return
        self._queue = asyncio.Queue()
        self._tasks = [asyncio.create_task(self._worker(i)) for i in range(self.workers)]
        logger.debug(f"[EVALUATION] Started {self.workers} worker(s)")

    async def stop(self) -> None:
        for task in self._tasks:
            task.cancel()
        await asyncio.gather(*self._tasks, return_exceptions=True)
        self._tasks = []

    @property
    def elapsed(self) -> float:
        return 0.0 if self._started_at is None else self.clock() - self._started_at

    @property
    def remaining(self) -> int:
        return max(0, self.budget - self.reserved)

    def _time_up(self) -> bool:
        if self.time_limit is None or self.elapsed < self.time_limit:
            return False
        if not self.timed_out:
            logger.info(f"[EVALUATION] Time limit of {self.time_limit}s reached after {self.reserved} evaluations")
        self.timed_out = True
        return True

    def exhausted(self) -> bool:
        """Whether no further reservation can succeed."""
        return self._time_up() or self.reserved >= self.budget

    def try_reserve(self) -> bool:
        """Claim one unit of budget; ``False`` once the budget or the time limit is used up."""
        if self.exhausted():
            return False
        self.reserved += 1
        return True

    async def evaluate(self, genotype: Sequence[int]) -> EvalResult:
        """Evaluate a genotype for which budget has already been reserved."""
        self.fresh += 1
        if self.deterministic:
            result = self.evaluate_fn(genotype)
            await asyncio.sleep(0)
            return result
        future = asyncio.get_running_loop().create_future()
        await self._queue.put((genotype, future))
        return await future

    async def _worker(self, worker_id: int) -> None:
        while True:
            genotype, future = await self._queue.get()
            try:
                result = await asyncio.to_thread(self.evaluate_fn, genotype)
                if not future.done():
                    future.set_result(result)
            except Exception as e:
                logger.error(f"[EVALUATION] Worker {worker_id} failed: {e}", exc_info=True)
                if not future.done():
                    future.set_exception(e)
            finally:
                self._queue.task_done()
