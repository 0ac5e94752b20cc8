import logging
from typing import Any, Dict

from ...synthdata import generate_dataset, save_dataset
from ..base_stage import BaseStage, StageResult

logger = logging.getLogger(__name__)


class DataGenerationStage(BaseStage):
    """Generates the synthetic dataset and writes its container."""

    def __init__(self):
        super().__init__(name="gen_data", description="Generates a seeded synthetic classification task")

    async def process(self, context: Dict[str, Any]) -> StageResult:
        try:
            cfg = context["config"].dataset
            paths = context["paths"]
            dataset = generate_dataset(cfg.kind, cfg.seed, cfg.n, cfg.classes, cfg.noise)
            path = save_dataset(dataset, paths.dataset)
            sizes = {name: dataset.split_size(name) for name in ("train", "validation", "test")}
            logger.info(f"[GEN DATA] {dataset.name}: {len(dataset)} samples {sizes}, written to {path}")
            return StageResult(success=True, data={"dataset": dataset, "path": str(path), "splits": sizes})
        except Exception as e:
            return self.failure(e)
