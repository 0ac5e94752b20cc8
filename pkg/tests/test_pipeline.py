"""Pipeline steps, artifacts and configuration."""

import json

import pytest
import yaml

from stitchlab import StitchingPipeline, load_experiment_config
from stitchlab.config import make_run_config
from stitchlab.errors import ConfigurationError
from stitchlab.stages import ArtifactPaths


def test_config_file_and_overrides(experiment_yaml):
    path = experiment_yaml
    config = load_experiment_config(path, {"search": {"budget": 80, "seed": None}, "preset": None})
    assert config.preset == "mlp"
    assert config.search.budget == 80 and config.search.seed == 0
    assert config.dataset.kind == "two_spirals"


def test_yaml_null_clears_a_default(tmp_path):
    path = tmp_path / "nulls.yaml"
    path.write_text("search:\n  eval_limit: null\n  time_limit: null\nstitch_training:\n", encoding="utf-8")
    config = load_experiment_config(path, {"search": {"eval_limit": None}})
    assert config.search.eval_limit is None
    assert config.search.time_limit is None
    assert config.stitch_training.max_samples == 1024
    assert load_experiment_config().search.eval_limit == 1000


def test_invalid_config_is_reported(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("search:\n  algorithm: hill-climbing\n", encoding="utf-8")
    with pytest.raises(ConfigurationError, match="invalid configuration"):
        load_experiment_config(path)
    with pytest.raises(ConfigurationError, match="does not exist"):
        load_experiment_config(tmp_path / "missing.yaml")


async def test_search_without_artifacts_fails_cleanly(experiment_yaml):
    pipeline = StitchingPipeline(load_experiment_config(experiment_yaml))
    result = await pipeline.search()
    assert not result.success
    assert "required artifact not found" in result.error


async def test_prepare_writes_every_artifact(prepared_experiment):
    config = load_experiment_config(prepared_experiment)
    paths = ArtifactPaths(config.output_dir)
    for artifact in (paths.dataset, paths.parent("A"), paths.parent("B"), paths.supernet,
                     paths.trained_supernet, paths.stitch_report, paths.config):
        assert artifact.exists(), artifact
    timing = json.loads(paths.timing.read_text(encoding="utf-8"))
    assert {"candidates", "matching", "construction", "stitch_training"} <= set(timing)
    report = json.loads(paths.stitch_report.read_text(encoding="utf-8"))
    assert len(report["stitches"]) == 4


async def test_search_then_report(prepared_experiment):
    config = load_experiment_config(prepared_experiment)
    pipeline = StitchingPipeline(config)
    result = await pipeline.search(make_run_config(algorithm="ga", population_size=8, budget=60,
                                                   seed=0, deterministic=True))
    assert result.success, result.error
    run_dir = pipeline.paths.run_dir("ga", 0)
    assert (run_dir / "runlog.jsonl").exists() and (run_dir / "summary.json").exists()

    report = await pipeline.report([run_dir])
    assert report.success, report.error
    header = (pipeline.paths.root / "report.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",")[:3] == ["split", "run", "reference"]
    summary = report.data["summary"]
    assert set(summary["references"]) == {"parent_a", "parent_b", "ensemble"}
    assert all(0.0 <= ref["ece"] <= 1.0 for ref in summary["references"].values())
    assert "test_hypervolume" in summary["runs"][0]


async def test_sweep_selects_and_saves_a_size(prepared_experiment):
    config = load_experiment_config(prepared_experiment)
    pipeline = StitchingPipeline(config)
    result = await pipeline.sweep("random", [8, 4])
    assert result.success, result.error
    assert [row["population_size"] for row in result.data["rows"]] == [4, 8]
    best = max(result.data["rows"], key=lambda row: row["hypervolume"])
    ties = [row["population_size"] for row in result.data["rows"] if row["hypervolume"] == best["hypervolume"]]
    assert result.data["selected"] == min(ties)
    saved = yaml.safe_load(pipeline.paths.config.read_text(encoding="utf-8"))
    assert saved["search"]["population_size"] == result.data["selected"]
    assert (pipeline.paths.root / "sweeps" / "random.csv").exists()


async def test_statistics_over_two_algorithms(prepared_experiment):
    config = load_experiment_config(prepared_experiment)
    pipeline = StitchingPipeline(config)
    for algorithm in ("ga", "random"):
        for seed in (0, 1):
            run_config = make_run_config(algorithm=algorithm, population_size=4, budget=40,
                                         seed=seed, deterministic=True)
            run_dir = pipeline.paths.root / "stats_runs" / algorithm / f"seed{seed}"
            assert (await pipeline.search(run_config, run_dir)).success
    roots = [pipeline.paths.root / "stats_runs" / a for a in ("ga", "random")]
    result = await pipeline.stats(roots)
    assert result.success, result.error
    assert result.data["report"].best in {"ga", "random"}
    assert (pipeline.paths.root / "stats.txt").read_text(encoding="utf-8").startswith("best")
