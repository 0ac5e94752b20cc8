import asyncio
import logging
from typing import Any, Dict

from ...stitcher import save_supernetwork, train_stitches
from ..base_stage import BaseStage, StageResult, record_timing, stopwatch

logger = logging.getLogger(__name__)


class StitchTrainingStage(BaseStage):
    """Trains all stitches at once and writes the trained supernetwork and report."""

    def __init__(self):
        super().__init__(name="train_stitches", description="Fits every stitch to its recipient layer")

    async def process(self, context: Dict[str, Any]) -> StageResult:
        try:
            paths = context["paths"]
            timings: Dict[str, float] = {}
            with stopwatch(timings, "stitch_training"):
                trained, report = await asyncio.to_thread(
                    train_stitches, context["supernet"], context["dataset"], context["config"].stitch_training
                )
            path = save_supernetwork(trained, paths.trained_supernet)
            report.save(paths.stitch_report)
            record_timing(paths.timing, **timings)
            worst = max((s.mse for s in report.stitches), default=0.0)
            logger.info(f"[STITCH TRAINING] {len(report.stitches)} stitch(es), worst MSE {worst:.6f}")
            return StageResult(success=True, data={
                "supernet": trained,
                "report": report,
                "path": str(path),
                "timing": timings,
            })
        except Exception as e:
            return self.failure(e)
