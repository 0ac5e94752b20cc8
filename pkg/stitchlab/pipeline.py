"""
Stitching pipeline coordinator.

This module implements the coordinator that takes an experiment from a
synthetic dataset to search statistics. Each step is handled by a dedicated
stage; steps run in sequence, except that the two parents are trained
concurrently because neither depends on the other.

Key Components:
- StitchingPipeline: coordinator holding the configuration, the artifact
  layout and the shared context the stages read and extend
- stages: one class per step, each returning a StageResult

Workflow:
1. Data generation: seeded synthetic task with train/validation/test splits
2. Parent training (parallel): parent A and parent B
3. Stitching: candidates, acyclic matching, supernetwork construction
4. Stitch training: all stitches fitted at once
5. Search: one run per algorithm, seed and population size
6. Reporting and statistics over finished runs

Every step also works on its own: missing inputs are loaded from the
artifact files earlier steps wrote into the output directory.
"""

import asyncio
import csv
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from .config import ExperimentConfig, RunConfig, make_run_config, save_experiment_config
from .netgraph import load_network
from .stages import (
    ArtifactPaths,
    DataGenerationStage,
    ParentTrainingStage,
    ReportingStage,
    SearchStage,
    StageResult,
    StatisticsStage,
    StitchingStage,
    StitchTrainingStage,
)
from .stitcher import load_supernetwork
from .synthdata import build_parent_pair, load_dataset

logger = logging.getLogger(__name__)


class StitchingPipeline:
    """
    Main coordinator of the stitching workflow.

    Args:
        config: resolved experiment configuration; artifacts go to
            ``config.output_dir``
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.paths = ArtifactPaths(Path(config.output_dir))
        self.context: Dict[str, Any] = {"config": config, "paths": self.paths}

        self.data_generation_stage = DataGenerationStage()
        self.parent_stages = {side: ParentTrainingStage(side) for side in ("A", "B")}
        self.stitching_stage = StitchingStage()
        self.stitch_training_stage = StitchTrainingStage()

    # Artifact loading -------------------------------------------------

    def _ensure(self, key: str, loader: Callable[[], Any]) -> Any:
        if key not in self.context:
            self.context[key] = loader()
        return self.context[key]

    def _dataset(self):
        return self._ensure("dataset", lambda: load_dataset(self.paths.require(self.paths.dataset)))

    def _parents(self):
        return self._ensure("parents", lambda: {
            side: load_network(self.paths.require(self.paths.parent(side))) for side in ("A", "B")
        })

    def _supernet(self, trained: bool):
        if trained:
            return self._ensure("trained_supernet", lambda: load_supernetwork(
                self.paths.require(self.paths.trained_supernet)))
        return self._ensure("supernet", lambda: load_supernetwork(self.paths.require(self.paths.supernet)))

    def _load_failure(self, step: str, error: Exception) -> StageResult:
        logger.error(f"[PIPELINE] {step}: {error}")
        return StageResult(success=False, data={}, error=f"{step}: {error}")

    # Steps ------------------------------------------------------------

    async def generate_data(self) -> StageResult:
        save_experiment_config(self.config, self.paths.config)
        result = await self.data_generation_stage.process(self.context)
        if result.success:
            self.context["dataset"] = result.data["dataset"]
        return result

    async def train_parents(self) -> StageResult:
        """Train parents A and B concurrently."""
        try:
            dataset = self._dataset()
            pair = build_parent_pair(self.config.preset, dataset.task, seed=self.config.parent_training.seed)
        except Exception as e:
            return self._load_failure("train_parents", e)
        self.context["untrained_parents"] = dict(zip(("A", "B"), pair))

        logger.info("[PIPELINE] Training parents A and B in parallel")
        results = await asyncio.gather(
            self.parent_stages["A"].process(self.context),
            self.parent_stages["B"].process(self.context),
        )
        failed = [r.error for r in results if not r.success]
        if failed:
            return StageResult(success=False, data={}, error="; ".join(failed))
        self.context["parents"] = {side: r.data["graph"] for side, r in zip(("A", "B"), results)}
        return StageResult(success=True, data={
            side: {k: v for k, v in r.data.items() if k != "graph"} for side, r in zip(("A", "B"), results)
        })

    async def stitch(self) -> StageResult:
        try:
            self._parents()
        except Exception as e:
            return self._load_failure("stitch", e)
        result = await self.stitching_stage.process(self.context)
        if result.success:
            self.context["supernet"] = result.data["supernet"]
            self.context.pop("trained_supernet", None)
        return result

    async def train_stitches(self) -> StageResult:
        try:
            self._dataset()
            self._supernet(trained=False)
        except Exception as e:
            return self._load_failure("train_stitches", e)
        result = await self.stitch_training_stage.process(self.context)
        if result.success:
            self.context["trained_supernet"] = result.data["supernet"]
        return result

    async def prepare(self) -> StageResult:
        """Generate data, train parents, stitch and train stitches, stopping at the first failure."""
        summary: Dict[str, Any] = {}
        for name, step in (("gen_data", self.generate_data), ("train_parents", self.train_parents),
                           ("stitch", self.stitch), ("train_stitches", self.train_stitches)):
            result = await step()
            if not result.success:
                return StageResult(success=False, data=summary, error=result.error)
            summary[name] = {k: v for k, v in result.data.items()
                             if isinstance(v, (int, float, str, bool, dict))}
        return StageResult(success=True, data=summary)

    def search_context(self) -> Dict[str, Any]:
        return {**self.context, "dataset": self._dataset(), "supernet": self._supernet(trained=True)}

    async def search(self, run_config: Optional[RunConfig] = None,
                     run_dir: Optional[Path] = None) -> StageResult:
        run_config = run_config or self.config.search
        run_dir = Path(run_dir) if run_dir else self.paths.run_dir(run_config.algorithm, run_config.seed)
        try:
            context = self.search_context()
        except Exception as e:
            return self._load_failure("search", e)
        return await SearchStage(run_config, run_dir).process(context)

    async def sweep(self, algorithm: str, sizes: Optional[Sequence[int]] = None) -> StageResult:
        """One run per population size; the size with the highest hypervolume wins, ties to the smallest.

        The chosen size is written back into the saved configuration.
        """
        sizes = sorted(set(sizes or self.config.sweep_sizes))
        rows: List[Dict[str, Any]] = []
        best: Optional[Dict[str, Any]] = None
        for n in sizes:
            try:
                run_config = make_run_config(**{**self.config.search.model_dump(),
                                                "algorithm": algorithm, "population_size": n})
            except Exception as e:
                return self._load_failure("sweep", e)
            run_dir = self.paths.run_dir(algorithm, run_config.seed, n)
            result = await self.search(run_config, run_dir)
            if not result.success:
                return result
            summary = result.data["summary"]
            row = {"population_size": n, "hypervolume": summary.hypervolume,
                   "evaluations": summary.evaluations, "skip_fraction": summary.skip_fraction,
                   "termination": summary.termination, "run_dir": str(run_dir)}
            rows.append(row)
            if best is None or row["hypervolume"] > best["hypervolume"]:
                best = row

        table = self.paths.root / "sweeps" / f"{algorithm}.csv"
        table.parent.mkdir(parents=True, exist_ok=True)
        with table.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        self.config.search = make_run_config(**{**self.config.search.model_dump(),
                                                "algorithm": algorithm,
                                                "population_size": best["population_size"]})
        save_experiment_config(self.config, self.paths.config)
        logger.info(f"[SWEEP] {algorithm}: selected n={best['population_size']} "
                    f"(hypervolume {best['hypervolume']:.5f})")
        return StageResult(success=True, data={"rows": rows, "selected": best["population_size"],
                                               "table": str(table)})

    async def report(self, run_dirs: Sequence[Path], test_split: bool = True,
                     output_dir: Optional[Path] = None) -> StageResult:
        try:
            context = self.search_context()
        except Exception as e:
            return self._load_failure("report", e)
        stage = ReportingStage(run_dirs, output_dir or self.paths.root, test_split)
        return await stage.process(context)

    async def stats(self, run_roots: Sequence[Path], output_path: Optional[Path] = None,
                    alpha: float = 0.05) -> StageResult:
        stage = StatisticsStage(run_roots, output_path or self.paths.root / "stats.txt", alpha)
        return await stage.process(self.context)
