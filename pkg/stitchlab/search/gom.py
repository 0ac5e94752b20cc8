"""Gene-pool optimal mixing."""

import asyncio
from dataclasses import dataclass
from typing import Awaitable, Callable, Optional, Sequence, Tuple

import numpy as np

from ..phenotype import EvalResult
from .objectives import ObjectivePoint
from .state import Individual

# (candidate, reference genotype, reference result) -> (result, point), or None without budget
EvaluateCandidate = Callable[[np.ndarray, Sequence[Tuple[np.ndarray, EvalResult]]],
                             Awaitable[Optional[Tuple[EvalResult, ObjectivePoint]]]]


@dataclass(frozen=True, eq=False)
class GOMOutcome:
    individual: Individual
    evaluations: int
    skipped: int
    exhausted: bool


async def gom_step(individual: Individual, subsets: Sequence[Sequence[int]],
                   donor: Callable[[], np.ndarray], evaluate: EvaluateCandidate,
                   accept: Callable[[ObjectivePoint, ObjectivePoint], bool],
                   rng: np.random.Generator) -> GOMOutcome:
    """Apply optimal mixing to one individual.

    Args:
        individual: the solution being improved
        subsets: linkage subsets, traversed in random order
        donor: returns the genotype of a random donor
        evaluate: budgeted evaluation with skipping against the given reference
        accept: whether a candidate may replace the current solution
        rng: random generator

    Returns:
        The improved individual with evaluation counts; ``exhausted`` is set
        when the budget ran out part-way.
    """
    current = individual
    evaluations = skipped = 0
    for s in rng.permutation(len(subsets)):
        subset = np.asarray(subsets[s], dtype=np.int64)
        source = donor()
        candidate = current.genotype.copy()
        candidate[subset] = source[subset]
        if np.array_equal(candidate, current.genotype):
            continue
        outcome = await evaluate(candidate, [(current.genotype, current.result)])
        if outcome is None:
            return GOMOutcome(current, evaluations, skipped, exhausted=True)
        result, point = outcome
        evaluations += 1
        skipped += int(result.skipped)
        if accept(point, current.point):
            current = Individual(candidate, result, point)
    # an application without evaluations must still let other loops run
    await asyncio.sleep(0)
    return GOMOutcome(current, evaluations, skipped, exhausted=False)
