"""Shared state of one search run: population, archive, steering and the evaluation log."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..config import RunConfig
from ..phenotype import EvalResult, biased_sample, reference_genotype, to_digits
from .archive import Archive, ArchiveEntry
from .objectives import ObjectivePoint, SteeringSchedule, Weight, assign_weights, weight_grid
from .runlog import EvaluationRecord
from .service import EvaluationService

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Individual:
    genotype: np.ndarray
    result: EvalResult
    point: ObjectivePoint


def initial_genotypes(length: int, n: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Parent A, parent B and the ensemble, then biased samples up to ``n``."""
    references = [reference_genotype(length, choice) for choice in (0, 1, 2)]
    population = references[:n]
    while len(population) < n:
        population.append(biased_sample(length, rng))
    return population


class SearchState:
    """Everything the per-individual loops share.

    Completion handling never awaits, so on a single event loop each
    completed evaluation is processed atomically and in completion order.
    """

    def __init__(self, cfg: RunConfig, genotype_length: int, normalizing_madds: int,
                 service: EvaluationService):
        self.cfg = cfg
        self.n = cfg.population_size
        self.genotype_length = genotype_length
        self.normalizing_madds = normalizing_madds
        self.service = service
        self.rng = np.random.default_rng(cfg.seed)
        self.initial = initial_genotypes(genotype_length, self.n, self.rng)
        self.population: List[Optional[Individual]] = [None] * self.n
        self.weights = weight_grid(self.n)
        self.assignment = np.arange(self.n)
        self.schedule = SteeringSchedule(cfg.budget, cfg.final_threshold)
        self.threshold = 0.0
        self.archive = Archive()
        self.records: List[EvaluationRecord] = []
        self.hv_trace: List[Tuple[int, float]] = []
        self.completed = 0
        self.skipped = 0

    @property
    def population_complete(self) -> bool:
        return all(ind is not None for ind in self.population)

    def genotypes(self) -> np.ndarray:
        return np.stack([ind.genotype for ind in self.population])

    def weight_of(self, index: int) -> Weight:
        w = self.weights[self.assignment[index]]
        return (float(w[0]), float(w[1]))

    def reassign_weights(self) -> None:
        self.assignment = assign_weights([ind.point for ind in self.population], self.weights, self.rng)

    def record(self, genotype: np.ndarray, result: EvalResult) -> ObjectivePoint:
        """Log one completed evaluation and update steering and the archive."""
        self.completed += 1
        self.skipped += int(result.skipped)
        self.threshold = self.schedule.threshold(self.completed)
        point = ObjectivePoint.from_result(result.accuracy, result.madds, self.normalizing_madds)
        digits = to_digits(genotype)
        self.archive.update(ArchiveEntry(digits, point, result.stitches), self.threshold)
        eval_index = self.completed - 1
        self.records.append(EvaluationRecord(
            eval_index=eval_index,
            algo=self.cfg.algorithm,
            seed=self.cfg.seed,
            genotype=digits,
            accuracy=point.accuracy,
            madds=point.madds,
            skipped=result.skipped,
            feasible=point.accuracy >= self.threshold,
            threshold=self.threshold,
            wall_ms=0 if self.cfg.deterministic else int(self.service.elapsed * 1000),
        ))
        self.hv_trace.append((eval_index, self.archive.hypervolume()))
        if self.completed % 100 == 0:
            logger.debug(
                f"[SEARCH] {self.completed} evaluations, threshold {self.threshold:.3f}, "
                f"archive {len(self.archive)}, hypervolume {self.hv_trace[-1][1]:.5f}"
            )
        return point
