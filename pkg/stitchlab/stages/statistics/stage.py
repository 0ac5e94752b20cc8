import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence

from ...errors import InsufficientSamplesError, MissingArtifactError
from ...search import mann_whitney_holm, read_summary
from ...search.runlog import SUMMARY_FILE
from ..base_stage import BaseStage, StageResult

logger = logging.getLogger(__name__)


def collect_hypervolumes(run_roots: Sequence[Path]) -> Dict[str, List[float]]:
    """Final hypervolume of every run summary below each root, grouped by algorithm."""
    groups: Dict[str, List[float]] = {}
    for root in run_roots:
        summaries = sorted(Path(root).rglob(SUMMARY_FILE))
        if not summaries:
            raise MissingArtifactError(f"no {SUMMARY_FILE} found under {root}")
        for path in summaries:
            summary = read_summary(path)
            groups.setdefault(summary.algorithm, []).append(summary.hypervolume)
    return groups


def format_table(report) -> str:
    lines = [
        f"best (highest median hypervolume): {report.best} median={report.best_median:.6f}",
        f"alpha={report.alpha} (Holm-Bonferroni)",
        "",
        f"{'algorithm':<12} {'median':>10} {'U':>8} {'p':>10} {'significant':>12}",
    ]
    for c in report.comparisons:
        lines.append(f"{c.algorithm:<12} {c.median:>10.6f} {c.u_statistic:>8.1f} {c.p_value:>10.4g} "
                     f"{'yes' if c.reject else 'no':>12}")
    return "\n".join(lines) + "\n"


class StatisticsStage(BaseStage):
    """Compares algorithms on final hypervolume with Mann-Whitney U tests."""

    def __init__(self, run_roots: Sequence[Path], output_path: Path, alpha: float = 0.05):
        super().__init__(name="stats", description="Mann-Whitney U with Holm-Bonferroni correction")
        self.run_roots = [Path(r) for r in run_roots]
        self.output_path = Path(output_path)
        self.alpha = alpha

    async def process(self, context: Dict[str, Any]) -> StageResult:
        try:
            groups = collect_hypervolumes(self.run_roots)
            if len(groups) < 2:
                raise InsufficientSamplesError(f"need ≥2 groups, got {len(groups)}")
            report = mann_whitney_holm(groups, self.alpha)
            table = format_table(report)
            self.output_path.parent.mkdir(parents=True, exist_ok=True)
            self.output_path.write_text(table, encoding="utf-8")
            return StageResult(success=True, data={"report": report, "table": table, "path": str(self.output_path)})
        except Exception as e:
            return self.failure(e)
