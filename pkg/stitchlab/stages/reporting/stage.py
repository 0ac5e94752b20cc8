"""
Combined front report over one or more finished search runs.

Archive members are re-evaluated on the test split and filtered for
dominance again, per split. Parent A, parent B and the ensemble are always
listed as reference rows. Each row carries its calibration error and whether
it lies outside the region the references dominate.
"""

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ...errors import ConfigurationError, MissingArtifactError
from ...phenotype import EvalResult, Evaluator, compute_ece, from_digits, reference_genotype, reference_madds, to_digits
from ...search import ObjectivePoint, hypervolume_2d, nondominated, read_archive_csv, weakly_dominates
from ...search.runlog import ARCHIVE_FILE
from ..base_stage import BaseStage, StageResult

logger = logging.getLogger(__name__)

REFERENCE_NAMES = ("parent_a", "parent_b", "ensemble")
REPORT_COLUMNS = ["split", "run", "reference", "genotype", "accuracy", "madds", "f1", "f2",
                  "stitches", "ece", "on_front", "beyond_references"]


@dataclass
class ReportRow:
    split: str
    run: str
    reference: str
    genotype: str
    point: ObjectivePoint
    stitches: int
    ece: Optional[float]
    on_front: bool = False
    beyond_references: bool = False

    def as_list(self) -> List[Any]:
        return [self.split, self.run, self.reference, self.genotype, repr(self.point.accuracy),
                self.point.madds, repr(self.point.f1), repr(self.point.f2), self.stitches,
                "" if self.ece is None else repr(self.ece), int(self.on_front), int(self.beyond_references)]


def mark_front(rows: Sequence[ReportRow]) -> List[ReportRow]:
    """Flag non-dominated rows and rows no reference weakly dominates; keep front members and references."""
    front = {(p.f1, p.f2) for p in nondominated([r.point for r in rows])}
    references = [r.point for r in rows if r.reference]
    kept = []
    for row in rows:
        row.on_front = (row.point.f1, row.point.f2) in front
        row.beyond_references = not any(weakly_dominates(ref, row.point) for ref in references)
        if row.on_front or row.reference:
            kept.append(row)
    return sorted(kept, key=lambda r: (r.point.f1, r.point.f2, r.reference, r.genotype))


def write_report_csv(rows: Sequence[ReportRow], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in rows:
            writer.writerow(row.as_list())
    return path


class ReportingStage(BaseStage):
    """Builds validation and test fronts, calibration errors and per-run hypervolumes.

    Args:
        run_dirs: finished search runs, each holding an archive CSV
        output_dir: where ``report.csv`` and ``report_summary.json`` go
        test_split: re-evaluate on the test split (otherwise validation only)
    """

    def __init__(self, run_dirs: Sequence[Path], output_dir: Path, test_split: bool = True):
        super().__init__(name="report", description="Reports fronts, references and calibration")
        self.run_dirs = [Path(d) for d in run_dirs]
        self.output_dir = Path(output_dir)
        self.test_split = test_split

    async def process(self, context: Dict[str, Any]) -> StageResult:
        try:
            return self._report(context)
        except Exception as e:
            return self.failure(e)

    def _report(self, context: Dict[str, Any]) -> StageResult:
        if not self.run_dirs:
            raise MissingArtifactError("no run directories to report on")
        supernet, dataset = context["supernet"], context["dataset"]
        cfg = context["config"]
        ece_split = "test" if self.test_split else "validation"
        if dataset.split_size(ece_split) == 0:
            raise ConfigurationError(f"dataset '{dataset.name}' has an empty {ece_split} split")

        norm = reference_madds(supernet)["ensemble"]
        validation = Evaluator(supernet, dataset, "validation", cfg.search.eval_limit)
        scoring = Evaluator(supernet, dataset, ece_split, keep_probabilities=True)
        _, scoring_labels = dataset.split(ece_split)
        cache: Dict[str, Tuple[EvalResult, float]] = {}

        def score(digits: str) -> Tuple[EvalResult, float]:
            if digits not in cache:
                result = scoring.evaluate(from_digits(digits))
                ece = compute_ece(result.probabilities, scoring_labels, cfg.ece_bins).ece
                cache[digits] = (result, ece)
            return cache[digits]

        def point(accuracy: float, madds: int) -> ObjectivePoint:
            return ObjectivePoint.from_result(accuracy, madds, norm)

        members: Dict[str, Tuple[str, float, int]] = {}
        run_hv = []
        for run_dir in self.run_dirs:
            archive = read_archive_csv(run_dir / ARCHIVE_FILE)
            for accuracy, madds, digits in archive:
                members.setdefault(digits, (str(run_dir), accuracy, madds))
            entry = {
                "run": str(run_dir),
                "members": len(archive),
                "validation_hypervolume": hypervolume_2d([point(a, m) for a, m, _ in archive]),
            }
            if self.test_split:
                test_points = [point(score(d)[0].accuracy, score(d)[0].madds) for _, _, d in archive]
                entry["test_hypervolume"] = hypervolume_2d(nondominated(test_points))
            run_hv.append(entry)

        validation_rows: List[ReportRow] = []
        test_rows: List[ReportRow] = []
        references = {}
        length = supernet.genotype_length
        for choice, name in enumerate(REFERENCE_NAMES):
            genotype = reference_genotype(length, choice)
            digits = to_digits(genotype)
            val_result = validation.evaluate(genotype)
            scored, ece = score(digits)
            references[name] = {
                "genotype": digits,
                "madds": val_result.madds,
                "validation_accuracy": val_result.accuracy,
                f"{ece_split}_accuracy": scored.accuracy,
                "ece": ece,
            }
            validation_rows.append(ReportRow("validation", "", name, digits,
                                             point(val_result.accuracy, val_result.madds), 0, ece))
            if self.test_split:
                test_rows.append(ReportRow("test", "", name, digits, point(scored.accuracy, scored.madds), 0, ece))

        for digits, (run, accuracy, madds) in members.items():
            scored, ece = score(digits)
            validation_rows.append(ReportRow("validation", run, "", digits, point(accuracy, madds),
                                             scored.stitches, ece))
            if self.test_split:
                test_rows.append(ReportRow("test", run, "", digits, point(scored.accuracy, scored.madds),
                                           scored.stitches, ece))

        rows = mark_front(validation_rows) + (mark_front(test_rows) if self.test_split else [])
        report_path = write_report_csv(rows, self.output_dir / "report.csv")
        summary = {
            "ece_split": ece_split,
            "ece_bins": cfg.ece_bins,
            "references": references,
            "runs": run_hv,
            "front_sizes": {
                split: sum(1 for r in rows if r.split == split and r.on_front and not r.reference)
                for split in (("validation", "test") if self.test_split else ("validation",))
            },
        }
        summary_path = self.output_dir / "report_summary.json"
        summary_path.write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        beyond = sum(1 for r in rows if r.split == "validation" and not r.reference and r.beyond_references)
        logger.info(
            f"[REPORT] {len(members)} archive member(s) from {len(self.run_dirs)} run(s); "
            f"{beyond} validation front member(s) outside the reference-dominated region"
        )
        return StageResult(success=True, data={
            "rows": rows,
            "summary": summary,
            "files": {"report": str(report_path), "summary": str(summary_path)},
        })
