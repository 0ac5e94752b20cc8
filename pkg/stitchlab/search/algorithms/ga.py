import logging

from ..state import Individual
from ..variation import ga_generate, ga_replace
from .base import SearchAlgorithm

logger = logging.getLogger(__name__)


class GeneticAlgorithm(SearchAlgorithm):
    """Steady-state GA with two-point crossover, uniform mutation and parent replacement.

    Weights are reassigned after every ``n`` completed evaluations.
    """

    name = "ga"

    def on_initialized(self) -> None:
        super().on_initialized()
        self._next_reassignment = self.state.completed + self.state.n

    async def individual_loop(self, index: int) -> None:
        state = self.state
        while True:
            j, k = (int(v) for v in state.rng.choice(state.n, size=2, replace=False))
            p1, p2 = state.population[j], state.population[k]
            child = ga_generate(p1.genotype, p2.genotype, state.rng)
            outcome = await self.evaluate(child, [(p1.genotype, p1.result), (p2.genotype, p2.result)])
            if outcome is None:
                return
            result, point = outcome
            slot = ga_replace(
                point,
                [(s, state.population[s].point, state.weight_of(s)) for s in (j, k)],
                state.threshold,
                state.rng,
            )
            if slot is not None:
                state.population[slot] = Individual(child, result, point)
            if state.completed >= self._next_reassignment:
                state.reassign_weights()
                self._next_reassignment = state.completed + state.n
