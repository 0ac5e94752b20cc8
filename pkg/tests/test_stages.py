"""Stage helpers: artifact layout, timing, front marking and hypervolume collection."""

from pathlib import Path

import pytest

from stitchlab.errors import MissingArtifactError
from stitchlab.search import ObjectivePoint, RunSummary
from stitchlab.search.runlog import write_summary
from stitchlab.stages import ArtifactPaths, record_timing
from stitchlab.stages.reporting.stage import ReportRow, mark_front
from stitchlab.stages.statistics.stage import collect_hypervolumes


def row(name, f1, f2, reference=""):
    point = ObjectivePoint(accuracy=1.0 - f1, madds=int(f2 * 100), f1=f1, f2=f2)
    return ReportRow("validation", "run", reference, name, point, 0, 0.1)


def test_run_directories():
    paths = ArtifactPaths(Path("exp"))
    assert paths.run_dir("ga", 3) == Path("exp/runs/ga/seed3")
    assert paths.run_dir("gomea", 0, 32) == Path("exp/runs/gomea/n32_seed0")
    with pytest.raises(MissingArtifactError):
        paths.require(paths.trained_supernet)


def test_timing_report_merges(tmp_path):
    path = tmp_path / "timing.json"
    record_timing(path, matching=1.23456)
    merged = record_timing(path, stitch_training=2.0)
    assert merged == {"matching": 1.235, "stitch_training": 2.0}


def test_front_marking_keeps_references_and_front():
    rows = [
        row("ensemble", 0.10, 1.00, reference="ensemble"),
        row("parent_a", 0.20, 0.40, reference="parent_a"),
        row("mixed", 0.15, 0.50),
        row("dominated", 0.30, 0.60),
        row("cheap", 0.40, 0.10),
    ]
    kept = {r.genotype: r for r in mark_front(rows)}
    assert set(kept) == {"ensemble", "parent_a", "mixed", "cheap"}
    assert kept["mixed"].on_front and kept["mixed"].beyond_references
    assert kept["cheap"].beyond_references
    assert not kept["parent_a"].beyond_references


def test_hypervolumes_are_grouped_by_algorithm(tmp_path):
    for algorithm, seed, hv in (("ga", 0, 0.5), ("ga", 1, 0.6), ("random", 0, 0.4)):
        write_summary(RunSummary(algorithm=algorithm, seed=seed, population_size=8, budget=60, evaluations=60,
                                 fresh_evaluations=50, skipped=10, skip_fraction=1 / 6, termination="budget",
                                 hypervolume=hv, archive_size=3, wall_seconds=0.0, reference_madds={}),
                      tmp_path / algorithm / f"seed{seed}" / "summary.json")
    groups = collect_hypervolumes([tmp_path / "ga", tmp_path / "random"])
    assert groups == {"ga": [0.5, 0.6], "random": [0.4]}
    with pytest.raises(MissingArtifactError):
        collect_hypervolumes([tmp_path / "empty"])
