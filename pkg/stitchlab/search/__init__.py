"""
Asynchronous multi-objective search over supernetwork genotypes.

Algorithms: ``ga``, ``gomea``, ``lk-gomea`` and the ``random`` baseline. All
minimize ``(1 - accuracy, madds / ensemble madds)`` under an accuracy
threshold that rises to 0.5 over the first half of the budget.
"""

from .algorithms import ALGORITHM_CLASSES, GOMEA, LKGOMEA, GeneticAlgorithm, RandomSearch, SearchAlgorithm
from .archive import HV_REFERENCE, Archive, ArchiveEntry, hypervolume_2d, nondominated, update_archive
from .gom import GOMOutcome, gom_step
from .linkage import build_linkage_tree, knn_neighborhood, mutual_information_matrix, sample_kernel_size
from .objectives import (
    ObjectivePoint,
    SteeringSchedule,
    assign_weights,
    constrained_better,
    dominates,
    tschebysheff,
    weakly_dominates,
    weight_grid,
)
from .runlog import (
    EvaluationRecord,
    RunSummary,
    read_archive_csv,
    read_runlog,
    read_summary,
    write_archive_csv,
)
from .runner import SearchOutcome, run_search, run_search_async
from .service import EvaluationService
from .state import Individual, SearchState, initial_genotypes
from .statistics import StatisticsReport, holm_bonferroni, mann_whitney, mann_whitney_holm
from .variation import ga_generate, ga_replace, two_point_crossover, uniform_mutation

__all__ = [
    "ALGORITHM_CLASSES",
    "Archive",
    "ArchiveEntry",
    "EvaluationRecord",
    "EvaluationService",
    "GOMEA",
    "GOMOutcome",
    "GeneticAlgorithm",
    "HV_REFERENCE",
    "Individual",
    "LKGOMEA",
    "ObjectivePoint",
    "RandomSearch",
    "RunSummary",
    "SearchAlgorithm",
    "SearchOutcome",
    "SearchState",
    "StatisticsReport",
    "SteeringSchedule",
    "assign_weights",
    "build_linkage_tree",
    "constrained_better",
    "dominates",
    "ga_generate",
    "ga_replace",
    "gom_step",
    "holm_bonferroni",
    "hypervolume_2d",
    "initial_genotypes",
    "knn_neighborhood",
    "mann_whitney",
    "mann_whitney_holm",
    "mutual_information_matrix",
    "nondominated",
    "read_archive_csv",
    "read_runlog",
    "read_summary",
    "run_search",
    "run_search_async",
    "sample_kernel_size",
    "tschebysheff",
    "two_point_crossover",
    "uniform_mutation",
    "update_archive",
    "weakly_dominates",
    "weight_grid",
    "write_archive_csv",
]
