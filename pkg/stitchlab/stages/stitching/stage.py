import logging
from typing import Any, Dict

from ...stitcher import acyclic_max_matching, build_supernetwork, find_candidates, save_supernetwork
from ..base_stage import BaseStage, StageResult, record_timing, stopwatch

logger = logging.getLogger(__name__)


class StitchingStage(BaseStage):
    """Finds stitch candidates, an acyclic matching and builds the supernetwork."""

    def __init__(self):
        super().__init__(name="stitch", description="Merges two parents into a supernetwork")

    async def process(self, context: Dict[str, Any]) -> StageResult:
        try:
            cfg = context["config"]
            parent_a, parent_b = context["parents"]["A"], context["parents"]["B"]
            timings: Dict[str, float] = {}
            with stopwatch(timings, "candidates"):
                candidates = find_candidates(parent_a, parent_b, stride=cfg.match_stride)
            with stopwatch(timings, "matching"):
                plan = acyclic_max_matching(parent_a, parent_b, candidates, max_expansions=cfg.match_budget)
            with stopwatch(timings, "construction"):
                supernet = build_supernetwork(parent_a, parent_b, plan, seed=cfg.stitch_training.seed)
            path = save_supernetwork(supernet, context["paths"].supernet)
            record_timing(context["paths"].timing, **timings)

            logger.info(
                f"[STITCH] {len(candidates)} candidate(s), {len(plan)} match(es)"
                f"{' (search budget exhausted)' if plan.timed_out else ''}, "
                f"genotype length {supernet.genotype_length}"
            )
            return StageResult(success=True, data={
                "supernet": supernet,
                "path": str(path),
                "candidates": len(candidates),
                "matches": len(plan),
                "genotype_length": supernet.genotype_length,
                "timed_out": plan.timed_out,
                "timing": timings,
            })
        except Exception as e:
            return self.failure(e)
