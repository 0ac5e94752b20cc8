import asyncio
import logging
from typing import Any, Dict

from ...netgraph import save_network
from ...synthdata import train_parent
from ..base_stage import BaseStage, StageResult

logger = logging.getLogger(__name__)


class ParentTrainingStage(BaseStage):
    """Trains one parent network and writes its container.

    Training runs in a worker thread so both parents can train concurrently.
    """

    def __init__(self, side: str):
        if side not in ("A", "B"):
            raise ValueError(f"side must be 'A' or 'B', got {side!r}")
        super().__init__(name=f"train_parent_{side}", description=f"Trains parent {side} with Adam")
        self.side = side

    async def process(self, context: Dict[str, Any]) -> StageResult:
        try:
            graph = context["untrained_parents"][self.side]
            cfg = context["config"].parent_training
            outcome = await asyncio.to_thread(train_parent, graph, context["dataset"], cfg)
            path = save_network(outcome.graph, context["paths"].parent(self.side))
            logger.info(
                f"[TRAIN PARENTS] {self.side}={outcome.graph.name}: validation acc "
                f"{outcome.validation_accuracy:.4f} after {outcome.steps} steps, written to {path}"
            )
            return StageResult(success=True, data={
                "graph": outcome.graph,
                "path": str(path),
                "train_accuracy": outcome.train_accuracy,
                "validation_accuracy": outcome.validation_accuracy,
                "steps": outcome.steps,
            })
        except Exception as e:
            return self.failure(e)
