import asyncio
import logging
from abc import ABC, abstractmethod
from typing import Optional, Sequence, Tuple

import numpy as np

from ...phenotype import EvalResult, maybe_skip
from ..objectives import ObjectivePoint
from ..state import Individual, SearchState

logger = logging.getLogger(__name__)


class SearchAlgorithm(ABC):
    """Base class for the asynchronous per-individual search loops.

    Every individual first evaluates its initial genotype. Once the whole
    population is in, weights are assigned and each individual runs
    :meth:`individual_loop` until the budget or the time limit is used up,
    or the loop decides it has converged.
    """

    name = "base"

    def __init__(self, state: SearchState):
        self.state = state
        self.service = state.service
        self._initialized = 0
        self._ready: Optional[asyncio.Event] = None

    async def run(self) -> str:
        """Run all loops to completion and return the termination reason."""
        self._ready = asyncio.Event()
        await asyncio.gather(*(self._lifecycle(i) for i in range(self.state.n)))
        return self.termination_reason()

    def termination_reason(self) -> str:
        if self.service.timed_out:
            return "time"
        if self.service.reserved >= self.service.budget:
            return "budget"
        return "converged"

    async def _lifecycle(self, index: int) -> None:
        genotype = self.state.initial[index]
        outcome = await self.evaluate(genotype)
        if outcome is not None:
            result, point = outcome
            self.state.population[index] = Individual(genotype, result, point)
        self._initialized += 1
        if self._initialized == self.state.n:
            if self.state.population_complete:
                self.on_initialized()
            else:
                logger.warning("[SEARCH] Budget ran out before the initial population was evaluated")
            self._ready.set()
        await self._ready.wait()
        if self.state.population_complete:
            await self.individual_loop(index)

    def on_initialized(self) -> None:
        self.state.reassign_weights()

    async def evaluate(self, genotype: np.ndarray,
                       references: Sequence[Tuple[np.ndarray, EvalResult]] = ()
                       ) -> Optional[Tuple[EvalResult, ObjectivePoint]]:
        """Reserve budget, then reuse a reference result or evaluate fresh.

        Returns ``None`` when no budget or time is left.
        """
        if not self.service.try_reserve():
            return None
        for ref_genotype, ref_result in references:
            reused = maybe_skip(ref_result, ref_genotype, genotype)
            if reused is not None:
                point = self.state.record(genotype, reused)
                await asyncio.sleep(0)
                return reused, point
        result = await self.service.evaluate(genotype)
        return result, self.state.record(genotype, result)

    @abstractmethod
    async def individual_loop(self, index: int) -> None:
        """Generate, evaluate and process solutions for one individual."""
        pass

    def __str__(self):
        return f"{self.name}: population {self.state.n}, budget {self.service.budget}"
