"""
Search entry point.

``run_search`` evaluates genotypes of a trained supernetwork on the
validation split with one of the asynchronous algorithms and returns the
evaluation log, the final archive and the hypervolume trace.
"""

import asyncio
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..config import RunConfig
from ..errors import ConfigurationError
from ..phenotype import Evaluator, reference_madds
from ..stitcher import Supernetwork
from .algorithms import algorithm_class
from .archive import Archive
from .runlog import (
    ARCHIVE_FILE,
    HV_FILE,
    RUNLOG_FILE,
    SUMMARY_FILE,
    EvaluationRecord,
    RunSummary,
    write_archive_csv,
    write_hv_trace,
    write_runlog,
    write_summary,
)
from .service import EvaluationService
from .state import SearchState

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class SearchOutcome:
    records: List[EvaluationRecord]
    archive: Archive
    hv_trace: List[Tuple[int, float]]
    summary: RunSummary

    @property
    def hypervolume(self) -> float:
        return self.summary.hypervolume

    def save(self, output_dir: Union[str, Path]) -> Dict[str, Path]:
        """Write run log, archive, hypervolume trace and summary into ``output_dir``."""
        output_dir = Path(output_dir)
        return {
            "runlog": write_runlog(self.records, output_dir / RUNLOG_FILE),
            "archive": write_archive_csv(self.archive.sorted_entries(), output_dir / ARCHIVE_FILE),
            "hv": write_hv_trace(self.hv_trace, output_dir / HV_FILE),
            "summary": write_summary(self.summary, output_dir / SUMMARY_FILE),
        }


async def run_search_async(supernet: Supernetwork, dataset, cfg: RunConfig,
                           evaluator: Optional[Evaluator] = None) -> SearchOutcome:
    if supernet.genotype_length < 1:
        raise ConfigurationError("supernetwork has no switches to search over")
    algorithm_cls = algorithm_class(cfg.algorithm)
    costs = reference_madds(supernet)
    if costs["ensemble"] <= 0:
        raise ConfigurationError("ensemble network has zero multiply-adds; cannot normalize costs")
    evaluator = evaluator or Evaluator(supernet, dataset, "validation", cfg.eval_limit)
    # shared caches must exist before worker threads read the graph
    supernet.graph.order
    supernet.graph.shapes

    started = time.perf_counter()
    service = EvaluationService(evaluator, cfg.budget, cfg.workers, cfg.deterministic, cfg.time_limit)
    state = SearchState(cfg, supernet.genotype_length, costs["ensemble"], service)
    algorithm = algorithm_cls(state)
    logger.info(
        f"[SEARCH] Starting {algorithm}; genotype length {supernet.genotype_length}, "
        f"workers {service.workers}{' (deterministic)' if cfg.deterministic else ''}"
    )
    async with service:
        termination = await algorithm.run()
    wall = time.perf_counter() - started

    evaluations = len(state.records)
    summary = RunSummary(
        algorithm=cfg.algorithm,
        seed=cfg.seed,
        population_size=cfg.population_size,
        budget=cfg.budget,
        evaluations=evaluations,
        fresh_evaluations=service.fresh,
        skipped=state.skipped,
        skip_fraction=state.skipped / evaluations if evaluations else 0.0,
        termination=termination,
        hypervolume=state.archive.hypervolume(),
        archive_size=len(state.archive),
        wall_seconds=0.0 if cfg.deterministic else round(wall, 3),
        reference_madds=costs,
    )
    logger.info(
        f"[SEARCH] {cfg.algorithm} finished ({termination}): {evaluations} evaluations, "
        f"{summary.skip_fraction:.1%} skipped, archive {summary.archive_size}, "
        f"hypervolume {summary.hypervolume:.5f}"
    )
    return SearchOutcome(state.records, state.archive, state.hv_trace, summary)


def run_search(supernet: Supernetwork, dataset, cfg: RunConfig,
               output_dir: Optional[Union[str, Path]] = None) -> SearchOutcome:
    """Run one search and optionally write its outputs.

    Args:
        supernet: trained supernetwork
        dataset: dataset whose validation split scores genotypes
        cfg: run configuration
        output_dir: directory for run log, archive, hypervolume trace and summary

    Returns:
        The completed :class:`SearchOutcome`.
    """
    outcome = asyncio.run(run_search_async(supernet, dataset, cfg))
    if output_dir is not None:
        outcome.save(output_dir)
    return outcome
