"""Synthetic tasks, parent presets and parent training."""

import numpy as np
import pytest
import scipy.linalg

from stitchlab.config import TrainConfig
from stitchlab.errors import ConfigurationError
from stitchlab.netgraph import GraphBuilder, TaskSignature, network_madds
from stitchlab.synthdata import (
    Dataset,
    build_parent_pair,
    evaluate_accuracy,
    generate_dataset,
    load_dataset,
    save_dataset,
    train_parent,
)
from stitchlab.tensorcore import LayerSpec


@pytest.mark.parametrize("kind,classes", [("two_spirals", 2), ("rings", 3), ("images", 4)])
def test_classes_are_balanced_and_splits_disjoint(kind, classes):
    dataset = generate_dataset(kind, seed=3, n=301, classes=classes)
    counts = np.bincount(dataset.labels, minlength=classes)
    assert counts.max() - counts.min() <= 1
    parts = [dataset.splits[name] for name in ("train", "validation", "test")]
    assert sum(p.size for p in parts) == len(dataset)
    assert np.unique(np.concatenate(parts)).size == len(dataset)


def test_split_sizes_and_limit(spirals):
    assert [spirals.split_size(s) for s in ("train", "validation", "test")] == [180, 60, 60]
    samples, labels = spirals.split("validation", limit=10)
    assert samples.shape == (10, 2) and labels.shape == (10,)


def test_same_seed_same_data():
    first = generate_dataset("images", seed=7, n=120)
    second = generate_dataset("images", seed=7, n=120)
    assert first.samples.shape == (120, 1, 16, 16)
    np.testing.assert_array_equal(first.samples, second.samples)
    np.testing.assert_array_equal(first.splits["test"], second.splits["test"])


def test_too_small_dataset_is_rejected():
    with pytest.raises(ConfigurationError):
        generate_dataset("two_spirals", seed=0, n=50)


def test_dataset_container_round_trip(tmp_path, spirals):
    loaded = load_dataset(save_dataset(spirals, tmp_path / "dataset.data"))
    np.testing.assert_array_equal(loaded.samples, spirals.samples)
    np.testing.assert_array_equal(loaded.labels, spirals.labels)
    assert loaded.task == spirals.task


@pytest.mark.parametrize("preset", ["deep_vs_shallow", "residual_vs_branched"])
def test_image_presets_fit_the_task(preset):
    task = generate_dataset("images", seed=0, n=100).task
    parent_a, parent_b = build_parent_pair(preset, task)
    assert parent_a.shapes[parent_a.output_node] == (1, 4)
    assert parent_b.shapes[parent_b.output_node] == (1, 4)
    assert network_madds(parent_a) != network_madds(parent_b)


def test_unknown_preset(spirals):
    with pytest.raises(ConfigurationError, match="unknown preset"):
        build_parent_pair("transformer", spirals.task)


def test_image_preset_rejects_tabular_task(spirals):
    with pytest.raises(ConfigurationError):
        build_parent_pair("deep_vs_shallow", spirals.task)


def test_training_lowers_the_loss(spirals, mlp_parents):
    outcome = train_parent(mlp_parents[0], spirals, TrainConfig(sample_budget=3200, lr=1e-2, seed=0))
    assert outcome.steps == 100
    assert np.mean(outcome.losses[-10:]) < np.mean(outcome.losses[:10])
    assert outcome.validation_accuracy == evaluate_accuracy(outcome.graph, spirals, "validation")


def test_zero_budget_leaves_the_parent_untouched(spirals, mlp_parents):
    outcome = train_parent(mlp_parents[1], spirals, TrainConfig(sample_budget=0))
    assert outcome.steps == 0 and outcome.losses == []
    assert outcome.graph is mlp_parents[1]


def test_accuracy_on_a_hand_counted_fixture():
    # identity logits: the larger coordinate is the prediction
    samples = np.array([
        [1.0, 0.0], [0.0, 1.0], [2.0, 1.0], [1.0, 3.0], [0.5, 0.2],
        [0.1, 0.9], [3.0, 2.0], [0.2, 0.4], [5.0, 1.0], [1.0, 2.0],
    ])
    labels = np.array([0, 1, 0, 1, 1, 0, 0, 0, 1, 1])
    # predictions:      0  1  0  1  0  1  0  1  0  1  -> 6 of 10 correct
    dataset = Dataset(name="fixture", samples=samples, labels=labels, num_classes=2,
                      splits={"validation": np.arange(10)}, seed=0)
    b = GraphBuilder("identity", TaskSignature((2,), 2))
    b.set_output(b.add("logits", LayerSpec.linear(2, 2), [b.input_id]))
    graph = b.build(np.random.default_rng(0)).with_weights(
        {"logits": [np.eye(2, dtype=np.float32), np.zeros(2, dtype=np.float32)]}
    )
    assert evaluate_accuracy(graph, dataset, "validation") == pytest.approx(0.6)
    assert evaluate_accuracy(graph, dataset, "validation", limit=5) == pytest.approx(0.8)


def test_images_are_linearly_separable_above_chance():
    dataset = generate_dataset("images", seed=1, n=400, classes=4)
    x_train, y_train = dataset.split("train")
    x_test, y_test = dataset.split("test")

    def features(x):
        flat = x.reshape(x.shape[0], -1).astype(np.float64)
        return np.hstack([flat, np.ones((flat.shape[0], 1))])

    design = features(x_train)
    targets = np.eye(4)[y_train]
    weights = scipy.linalg.solve(design.T @ design + np.eye(design.shape[1]), design.T @ targets,
                                 assume_a="pos")
    accuracy = float(np.mean(np.argmax(features(x_test) @ weights, axis=1) == y_test))
    assert accuracy > 0.5
