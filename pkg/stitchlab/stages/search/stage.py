import logging
from pathlib import Path
from typing import Any, Dict

from ...config import RunConfig
from ...search import run_search_async
from ..base_stage import BaseStage, StageResult

logger = logging.getLogger(__name__)


class SearchStage(BaseStage):
    """One search run over the trained supernetwork.

    Args:
        run_config: algorithm, population size, budget and seed
        run_dir: directory receiving run log, archive, hypervolume trace and summary
    """

    def __init__(self, run_config: RunConfig, run_dir: Path):
        super().__init__(
            name="search",
            description=f"{run_config.algorithm} search with n={run_config.population_size}",
        )
        self.run_config = run_config
        self.run_dir = Path(run_dir)

    async def process(self, context: Dict[str, Any]) -> StageResult:
        try:
            outcome = await run_search_async(context["supernet"], context["dataset"], self.run_config)
            files = outcome.save(self.run_dir)
            return StageResult(success=True, data={
                "summary": outcome.summary,
                "outcome": outcome,
                "run_dir": str(self.run_dir),
                "files": {k: str(v) for k, v in files.items()},
            })
        except Exception as e:
            return self.failure(e)
