"""
Built-in parent architecture pairs.

* ``mlp``: a three-layer and a two-layer perceptron for tabular tasks.
* ``deep_vs_shallow``: CNNs of unequal depth (four vs two convolutions).
* ``residual_vs_branched``: CNNs of equal depth, one with a residual block,
  the other with two parallel convolution branches joined by a concat and a
  frozen batch norm.

Every preset returns untrained graphs with He-initialized weights.
"""

import logging
from typing import Callable, Dict, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..netgraph import GraphBuilder, NetworkGraph, TaskSignature
from ..tensorcore import LayerSpec

logger = logging.getLogger(__name__)

ParentPair = Tuple[NetworkGraph, NetworkGraph]


def _conv_block(b: GraphBuilder, prefix: str, src: str, c_in: int, c_out: int) -> str:
    conv = b.add(f"{prefix}", LayerSpec.conv2d(c_in, c_out, 3, padding=1), [src])
    return b.add(f"{prefix}_relu", LayerSpec.relu(), [conv])


def _require_image_task(task: TaskSignature, preset: str) -> int:
    if len(task.input_shape) != 3:
        raise ConfigurationError(f"preset '{preset}' needs image inputs [C, H, W], got {list(task.input_shape)}")
    channels, height, width = task.input_shape
    if height % 4 or width % 4:
        raise ConfigurationError(f"preset '{preset}' needs spatial sizes divisible by 4")
    return channels


def mlp_pair(task: TaskSignature, seed: int = 0, hidden: int = 32) -> ParentPair:
    if len(task.input_shape) != 1:
        raise ConfigurationError(f"preset 'mlp' needs flat inputs, got {list(task.input_shape)}")
    n_in, k = task.input_shape[0], task.num_classes
    rng = np.random.default_rng(seed)

    a = GraphBuilder("mlp_deep", task)
    h = a.add("fc1", LayerSpec.linear(n_in, hidden), [a.input_id])
    h = a.add("relu1", LayerSpec.relu(), [h])
    h = a.add("fc2", LayerSpec.linear(hidden, hidden), [h])
    h = a.add("relu2", LayerSpec.relu(), [h])
    a.set_output(a.add("logits", LayerSpec.linear(hidden, k), [h]))

    b = GraphBuilder("mlp_wide", task)
    h = b.add("fc1", LayerSpec.linear(n_in, 2 * hidden), [b.input_id])
    h = b.add("relu1", LayerSpec.relu(), [h])
    b.set_output(b.add("logits", LayerSpec.linear(2 * hidden, k), [h]))
    return a.build(rng), b.build(rng)


def deep_vs_shallow(task: TaskSignature, seed: int = 0) -> ParentPair:
    channels = _require_image_task(task, "deep_vs_shallow")
    k = task.num_classes
    rng = np.random.default_rng(seed)

    a = GraphBuilder("cnn_deep", task)
    h = _conv_block(a, "conv1", a.input_id, channels, 8)
    h = _conv_block(a, "conv2", h, 8, 8)
    h = a.add("pool1", LayerSpec.max_pool(2), [h])
    h = _conv_block(a, "conv3", h, 8, 16)
    h = _conv_block(a, "conv4", h, 16, 16)
    h = a.add("pool2", LayerSpec.max_pool(2), [h])
    h = a.add("gap", LayerSpec.global_avg_pool(), [h])
    a.set_output(a.add("logits", LayerSpec.linear(16, k), [h]))

    b = GraphBuilder("cnn_shallow", task)
    h = _conv_block(b, "conv1", b.input_id, channels, 8)
    h = b.add("pool1", LayerSpec.max_pool(2), [h])
    h = _conv_block(b, "conv2", h, 8, 16)
    h = b.add("pool2", LayerSpec.max_pool(2), [h])
    h = b.add("flatten", LayerSpec.flatten(), [h])
    flat = 16 * (task.input_shape[1] // 4) * (task.input_shape[2] // 4)
    h = b.add("fc1", LayerSpec.linear(flat, 32), [h])
    h = b.add("fc1_relu", LayerSpec.relu(), [h])
    b.set_output(b.add("logits", LayerSpec.linear(32, k), [h]))
    return a.build(rng), b.build(rng)


def residual_vs_branched(task: TaskSignature, seed: int = 0) -> ParentPair:
    channels = _require_image_task(task, "residual_vs_branched")
    k = task.num_classes
    rng = np.random.default_rng(seed)

    a = GraphBuilder("cnn_residual", task)
    stem = _conv_block(a, "stem", a.input_id, channels, 8)
    h = _conv_block(a, "res1", stem, 8, 8)
    h = a.add("res2", LayerSpec.conv2d(8, 8, 3, padding=1), [h])
    h = a.add("res_add", LayerSpec.add(2), [stem, h])
    h = a.add("res_relu", LayerSpec.relu(), [h])
    h = a.add("pool1", LayerSpec.max_pool(2), [h])
    h = _conv_block(a, "conv3", h, 8, 16)
    h = a.add("pool2", LayerSpec.max_pool(2), [h])
    h = a.add("gap", LayerSpec.global_avg_pool(), [h])
    a.set_output(a.add("logits", LayerSpec.linear(16, k), [h]))

    b = GraphBuilder("cnn_branched", task)
    stem = _conv_block(b, "stem", b.input_id, channels, 8)
    left = _conv_block(b, "left", stem, 8, 4)
    right = b.add("right", LayerSpec.conv2d(8, 4, 1), [stem])
    right = b.add("right_relu", LayerSpec.relu(), [right])
    h = b.add("merge", LayerSpec.concat(2, axis=1), [left, right])
    h = b.add("merge_bn", LayerSpec.batch_norm(8), [h])
    h = b.add("pool1", LayerSpec.avg_pool(2), [h])
    h = _conv_block(b, "conv3", h, 8, 16)
    h = b.add("pool2", LayerSpec.avg_pool(2), [h])
    h = b.add("gap", LayerSpec.global_avg_pool(), [h])
    b.set_output(b.add("logits", LayerSpec.linear(16, k), [h]))
    return a.build(rng), b.build(rng)


PRESETS: Dict[str, Callable[..., ParentPair]] = {
    "mlp": mlp_pair,
    "deep_vs_shallow": deep_vs_shallow,
    "residual_vs_branched": residual_vs_branched,
}


def build_parent_pair(preset: str, task: TaskSignature, seed: int = 0) -> ParentPair:
    """Untrained parents A and B of a named preset."""
    try:
        factory = PRESETS[preset]
    except KeyError:
        raise ConfigurationError(f"unknown preset '{preset}' (choose from {sorted(PRESETS)})") from None
    parent_a, parent_b = factory(task, seed=seed)
    logger.info(
        f"[PRESET] {preset}: A={parent_a.name} ({len(parent_a)} nodes), "
        f"B={parent_b.name} ({len(parent_b)} nodes)"
    )
    return parent_a, parent_b
