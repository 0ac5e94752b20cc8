"""Image-task experiment from data generation to statistics (slow)."""

import asyncio

import pytest

from stitchlab import StitchingPipeline, load_experiment_config
from stitchlab.config import make_run_config

pytestmark = pytest.mark.slow


@pytest.mark.parametrize("preset", ["deep_vs_shallow", "residual_vs_branched"])
def test_image_experiment(tmp_path, preset):
    config = load_experiment_config(overrides={
        "output_dir": str(tmp_path / preset),
        "dataset": {"kind": "images", "n": 600, "classes": 4},
        "preset": preset,
        "parent_training": {"sample_budget": 8000},
        "search": {"population_size": 16, "budget": 400, "deterministic": True},
    })
    pipeline = StitchingPipeline(config)
    prepared = asyncio.run(pipeline.prepare())
    assert prepared.success, prepared.error
    assert prepared.data["stitch"]["matches"] >= 2

    run_dirs = []
    skip: dict = {}
    for algorithm in ("ga", "gomea", "lk-gomea", "random"):
        for seed in (0, 1):
            run_config = make_run_config(**{**config.search.model_dump(), "algorithm": algorithm, "seed": seed})
            result = asyncio.run(pipeline.search(run_config))
            assert result.success, result.error
            summary = result.data["summary"]
            assert summary.evaluations <= 400
            skip.setdefault(algorithm, []).append(summary.skip_fraction)
            run_dirs.append(pipeline.paths.run_dir(algorithm, seed))

    assert sum(skip["gomea"]) > sum(skip["ga"])

    report = asyncio.run(pipeline.report(run_dirs))
    assert report.success, report.error
    stats = asyncio.run(pipeline.stats([pipeline.paths.root / "runs"]))
    assert stats.success, stats.error
    assert {c.algorithm for c in stats.data["report"].comparisons} | {stats.data["report"].best} == {
        "ga", "gomea", "lk-gomea", "random"}
