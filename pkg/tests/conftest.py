"""Shared fixtures: a small two-spirals task, MLP parents and their supernetwork."""

import logging

import numpy as np
import pytest

from stitchlab.config import StitchTrainConfig, TrainConfig
from stitchlab.netgraph import GraphBuilder, TaskSignature
from stitchlab.stitcher import acyclic_max_matching, build_supernetwork, find_candidates, train_stitches
from stitchlab.synthdata import build_parent_pair, generate_dataset, train_parent
from stitchlab.tensorcore import LayerSpec

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def spirals():
    return generate_dataset("two_spirals", seed=0, n=300)


@pytest.fixture(scope="session")
def mlp_parents(spirals):
    return build_parent_pair("mlp", spirals.task, seed=0)


@pytest.fixture(scope="session")
def trained_parents(spirals, mlp_parents):
    cfg = TrainConfig(sample_budget=1600, batch_size=32, seed=0)
    return tuple(train_parent(graph, spirals, cfg).graph for graph in mlp_parents)


@pytest.fixture(scope="session")
def supernet(trained_parents):
    parent_a, parent_b = trained_parents
    plan = acyclic_max_matching(parent_a, parent_b, find_candidates(parent_a, parent_b))
    return build_supernetwork(parent_a, parent_b, plan, seed=0)


@pytest.fixture(scope="session")
def trained_supernet(supernet, spirals):
    trained, _ = train_stitches(supernet, spirals, StitchTrainConfig())
    return trained


@pytest.fixture
def tiny_mlp():
    """2 -> 4 -> relu -> 2 perceptron with seeded weights."""
    b = GraphBuilder("tiny", TaskSignature((2,), 2))
    h = b.add("fc1", LayerSpec.linear(2, 4), [b.input_id])
    h = b.add("relu1", LayerSpec.relu(), [h])
    b.set_output(b.add("logits", LayerSpec.linear(4, 2), [h]))
    return b.build(np.random.default_rng(0))


def write_experiment_yaml(directory, **search):
    """A fast two-spirals experiment; ``search`` overrides run settings."""
    import yaml

    config = {
        "name": "spirals",
        "output_dir": str(directory / "experiment"),
        "dataset": {"kind": "two_spirals", "n": 300, "seed": 0},
        "preset": "mlp",
        "parent_training": {"sample_budget": 1600, "batch_size": 32},
        "search": {"population_size": 8, "budget": 60, "deterministic": True, **search},
        "sweep_sizes": [4, 8],
    }
    path = directory / "experiment.yaml"
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def prepared_experiment(tmp_path_factory):
    """Config path of an experiment whose data, parents and trained supernetwork exist."""
    import asyncio

    from stitchlab import StitchingPipeline, load_experiment_config

    directory = tmp_path_factory.mktemp("prepared")
    path = write_experiment_yaml(directory)
    result = asyncio.run(StitchingPipeline(load_experiment_config(path)).prepare())
    assert result.success, result.error
    return path


@pytest.fixture
def experiment_yaml(tmp_path):
    return write_experiment_yaml(tmp_path)
