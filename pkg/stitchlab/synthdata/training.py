"""Minibatch training and evaluation of parent networks."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import TrainConfig
from ..errors import ConfigurationError, TrainingDivergedError
from ..netgraph import NetworkGraph, backward, forward
from ..tensorcore import AdamState, adam_step

logger = logging.getLogger(__name__)


@dataclass
class TrainingOutcome:
    graph: NetworkGraph
    train_accuracy: float
    validation_accuracy: float
    steps: int
    losses: List[float] = field(default_factory=list)


def check_signature(graph: NetworkGraph, dataset) -> None:
    if graph.task.input_shape != dataset.input_shape or graph.task.num_classes != dataset.num_classes:
        raise ConfigurationError(
            f"network '{graph.name}' expects {list(graph.task.input_shape)} -> {graph.task.num_classes} classes, "
            f"dataset '{dataset.name}' provides {list(dataset.input_shape)} -> {dataset.num_classes} classes"
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean cross-entropy of ``logits`` against integer ``labels`` and its gradient."""
    probs = softmax(logits.astype(np.float64))
    n = labels.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(-np.mean(np.log(np.maximum(picked, 1e-12))))
    grad = probs
    grad[np.arange(n), labels] -= 1.0
    return loss, (grad / n).astype(np.float32)


def _minibatches(train_size: int, batch_size: int, steps: int, rng: np.random.Generator):
    order = np.empty(0, dtype=np.int64)
    for _ in range(steps):
        while order.size < batch_size:
            order = np.concatenate([order, rng.permutation(train_size)])
        yield order[:batch_size]
        order = order[batch_size:]


def train_parent(graph: NetworkGraph, dataset, cfg: Optional[TrainConfig] = None) -> TrainingOutcome:
    """Train every parameterised layer of ``graph`` with Adam on softmax cross-entropy.

    The number of steps is ``ceil(sample_budget / batch_size)``; a zero budget
    returns the graph unchanged. BatchNorm running statistics stay frozen.

    Raises:
        ConfigurationError: the graph does not match the dataset
        TrainingDivergedError: the loss became non-finite
    """
    cfg = cfg or TrainConfig()
    check_signature(graph, dataset)
    x_train, y_train = dataset.split("train")
    if x_train.shape[0] == 0:
        raise ConfigurationError(f"dataset '{dataset.name}' has an empty train split")

    steps = math.ceil(cfg.sample_budget / cfg.batch_size)
    rng = np.random.default_rng(cfg.seed)
    batch_size = min(cfg.batch_size, x_train.shape[0])
    trainable = {
        node_id: node.spec.trainable_indices
        for node_id, node in graph.nodes.items()
        if node.spec.trainable_indices
    }
    weights: Dict[str, List[np.ndarray]] = {
        node_id: [np.array(w) for w in graph.nodes[node_id].weights] for node_id in trainable
    }
    states: Dict[str, AdamState] = {node_id: AdamState() for node_id in trainable}
    losses: List[float] = []

    logger.info(f"[TRAINING] {graph.name}: {steps} steps of batch {batch_size}, lr={cfg.lr}")
    current = graph
    for step, index in enumerate(_minibatches(x_train.shape[0], batch_size, steps, rng), start=1):
        logits, record = forward(current, x_train[index], capture=True)
        loss, grad = softmax_cross_entropy(logits, y_train[index])
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"{graph.name}: loss became non-finite at step {step}")
        losses.append(loss)
        grads = backward(current, x_train[index], grad, record)
        for node_id, indices in trainable.items():
            if node_id not in grads:
                continue
            params = [weights[node_id][i] for i in indices]
            updated, states[node_id] = adam_step(params, [grads[node_id][i] for i in indices],
                                                 states[node_id], cfg.lr)
            for i, value in zip(indices, updated):
                weights[node_id][i] = value
        current = graph.with_weights(weights)
        if step % cfg.log_every == 0:
            recent = float(np.mean(losses[-cfg.log_every:]))
            logger.debug(f"[TRAINING] {graph.name}: step {step}/{steps} loss {recent:.4f}")

    train_acc = evaluate_accuracy(current, dataset, "train")
    val_acc = evaluate_accuracy(current, dataset, "validation") if dataset.split_size("validation") else 0.0
    logger.info(f"[TRAINING] {graph.name}: train acc {train_acc:.4f}, validation acc {val_acc:.4f}")
    return TrainingOutcome(current, train_acc, val_acc, steps, losses)


def predict_logits(graph: NetworkGraph, samples: np.ndarray, batch_size: int = 256,
                   selections: Optional[Dict[str, int]] = None) -> np.ndarray:
    outputs = [
        forward(graph, samples[start:start + batch_size], selections=selections)
        for start in range(0, samples.shape[0], batch_size)
    ]
    if not outputs:
        return np.zeros((0, graph.task.num_classes), dtype=np.float32)
    return np.concatenate(outputs, axis=0)


def accuracy_of(logits: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of rows whose argmax equals the label; ties go to the lowest class."""
    if labels.shape[0] == 0:
        return 0.0
    return float(np.mean(np.argmax(logits, axis=1) == labels))


def evaluate_accuracy(graph: NetworkGraph, dataset, split: str = "validation",
                      limit: Optional[int] = None) -> float:
    check_signature(graph, dataset)
    samples, labels = dataset.split(split, limit)
    return accuracy_of(predict_logits(graph, samples), labels)
