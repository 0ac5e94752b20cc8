from ...phenotype import biased_sample
from .base import SearchAlgorithm


class RandomSearch(SearchAlgorithm):
    """Baseline: every loop keeps drawing biased random genotypes."""

    name = "random"

    def on_initialized(self) -> None:
        pass

    async def individual_loop(self, index: int) -> None:
        while True:
            genotype = biased_sample(self.state.genotype_length, self.state.rng)
            if await self.evaluate(genotype) is None:
                return
