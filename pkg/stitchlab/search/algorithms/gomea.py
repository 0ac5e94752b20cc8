import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..gom import gom_step
from ..linkage import build_linkage_tree, knn_neighborhood, mutual_information_matrix, sample_kernel_size
from ..objectives import ObjectivePoint, constrained_better, same_objectives
from .base import SearchAlgorithm

logger = logging.getLogger(__name__)


class GOMEA(SearchAlgorithm):
    """Asynchronous GOMEA with one population-wide linkage tree.

    The linkage tree is relearned and the weights reassigned after every
    ``n`` GOM applications. The run converges once all genotypes are equal.
    """

    name = "gomea"

    def __init__(self, state):
        super().__init__(state)
        self.applications = 0
        self.subsets: List[List[int]] = []

    def on_initialized(self) -> None:
        super().on_initialized()
        self.rebuild_model()

    def rebuild_model(self) -> None:
        self.subsets = build_linkage_tree(mutual_information_matrix(self.state.genotypes()))

    def mixing_plan(self, index: int) -> Optional[Tuple[Sequence[Sequence[int]], List[int]]]:
        """Subsets and donor indices for the next application, or ``None`` when converged."""
        genotypes = self.state.genotypes()
        if np.all(genotypes == genotypes[0]):
            return None
        donors = [j for j in range(self.state.n) if j != index]
        return self.subsets, donors

    def after_generation(self) -> None:
        self.rebuild_model()
        self.state.reassign_weights()

    async def individual_loop(self, index: int) -> None:
        state = self.state
        while not self.service.exhausted():
            plan = self.mixing_plan(index)
            if plan is None:
                logger.info(f"[SEARCH] {self.name}: individual {index} converged after {state.completed} evaluations")
                return
            subsets, donors = plan

            def donor() -> np.ndarray:
                return state.population[donors[int(state.rng.integers(0, len(donors)))]].genotype

            def accept(candidate: ObjectivePoint, current: ObjectivePoint) -> bool:
                return (constrained_better(candidate, current, state.threshold, state.weight_of(index))
                        or same_objectives(candidate, current))

            outcome = await gom_step(state.population[index], subsets, donor, self.evaluate, accept, state.rng)
            state.population[index] = outcome.individual
            if outcome.exhausted:
                return
            self.applications += 1
            if self.applications % state.n == 0:
                self.after_generation()


class LKGOMEA(GOMEA):
    """GOMEA with a linkage tree learned per application from a k-nearest-neighbor kernel.

    An individual whose sampled neighborhood holds only copies of itself
    stops; the run converges when every individual has stopped.
    """

    name = "lk-gomea"

    def rebuild_model(self) -> None:
        pass

    def after_generation(self) -> None:
        self.state.reassign_weights()

    def mixing_plan(self, index: int) -> Optional[Tuple[Sequence[Sequence[int]], List[int]]]:
        state = self.state
        genotypes = state.genotypes()
        k = sample_kernel_size(state.n, state.cfg.kernel_min_size, state.rng)
        neighborhood = knn_neighborhood(genotypes, index, k)
        sample = genotypes[neighborhood]
        if np.all(sample == sample[0]):
            return None
        return build_linkage_tree(mutual_information_matrix(sample)), neighborhood[1:]
