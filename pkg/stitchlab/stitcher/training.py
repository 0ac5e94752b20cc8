"""
Simultaneous training of all stitching layers.

Activations are captured once with every switch passing its original input,
so no stitch influences what any other stitch sees. Each stitch then learns
to map its donor layer's output onto its recipient layer's output under a
mean-squared-error loss, either exactly (ridge least squares) or with Adam.
Parent weights are never touched.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel

from ..config import StitchTrainConfig
from ..errors import ConfigurationError, SingularSystemError, TrainingDivergedError
from ..netgraph import ActivationRecord, forward
from ..tensorcore import AdamState, LayerKind, LayerSpec, adam_step, backward_layer, forward_layer
from .supernet import Supernetwork

logger = logging.getLogger(__name__)


class StitchReport(BaseModel):
    stitch_id: str
    samples: int
    mse: float
    initial_mse: float
    method: str


class StitchTrainingReport(BaseModel):
    method: str
    samples: int
    stitches: List[StitchReport]

    def by_id(self) -> Dict[str, StitchReport]:
        return {s.stitch_id: s for s in self.stitches}

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=1) + "\n", encoding="utf-8")
        return path


def solve_stitch_least_squares(x: np.ndarray, y: np.ndarray, ridge: float = 1e-6) -> Tuple[np.ndarray, np.ndarray]:
    """Minimize ``|x W + b - y|^2 + ridge |W|^2`` on mean-centered data.

    Args:
        x: donor activations ``[S, n]``
        y: target activations ``[S, m]``
        ridge: non-negative L2 penalty on ``W``

    Returns:
        ``(W [n, m], b [m])`` as float32.

    Raises:
        SingularSystemError: the unregularized normal equations are singular.
    """
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0] or x.shape[0] < 1:
        raise ConfigurationError(f"least squares needs [S, n] and [S, m] inputs, got {x.shape} and {y.shape}")
    if ridge < 0:
        raise ConfigurationError(f"ridge must be non-negative, got {ridge}")
    x64 = x.astype(np.float64)
    y64 = y.astype(np.float64)
    x_mean, y_mean = x64.mean(axis=0), y64.mean(axis=0)
    xc, yc = x64 - x_mean, y64 - y_mean
    n = x.shape[1]
    if ridge == 0 and np.linalg.matrix_rank(xc) < n:
        raise SingularSystemError(
            "normal equations are singular (rank-deficient activations); use a ridge penalty > 0"
        )
    gram = xc.T @ xc + ridge * np.eye(n)
    try:
        weight = scipy.linalg.solve(gram, xc.T @ yc, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise SingularSystemError(f"least squares solve failed ({e}); use a ridge penalty > 0") from None
    bias = y_mean - x_mean @ weight
    return weight.astype(np.float32), bias.astype(np.float32)


def _as_rows(tensor: np.ndarray) -> np.ndarray:
    """Fold spatial positions of ``[S, C, H, W]`` into the sample axis."""
    if tensor.ndim == 4:
        return tensor.transpose(0, 2, 3, 1).reshape(-1, tensor.shape[1])
    return tensor


def _to_layer_weights(spec: LayerSpec, weight: np.ndarray, bias: np.ndarray) -> List[np.ndarray]:
    if spec.kind == LayerKind.CONV2D:
        return [np.ascontiguousarray(weight.T[:, :, None, None], dtype=np.float32), bias]
    return [weight, bias]


def stitch_mse(spec: LayerSpec, weights, x: np.ndarray, y: np.ndarray) -> float:
    pred = forward_layer(spec, weights, [x])
    return float(np.mean((pred.astype(np.float64) - y.astype(np.float64)) ** 2))


def capture_activations(supernet: Supernetwork, samples: np.ndarray, batch_size: int = 256) -> ActivationRecord:
    """Donor and recipient activations of every stitch, all switches at their originals."""
    wanted = set()
    for stitch_id in supernet.stitch_ids:
        wanted.add(supernet.stitch_donor(stitch_id))
        wanted.add(supernet.stitch_target(stitch_id))
    chunks: Dict[str, List[np.ndarray]] = {node_id: [] for node_id in wanted}
    for start in range(0, samples.shape[0], batch_size):
        _, record = forward(supernet.graph, samples[start:start + batch_size], capture=True)
        for node_id in wanted:
            chunks[node_id].append(record[node_id])
    return {node_id: np.concatenate(parts, axis=0) for node_id, parts in chunks.items() if parts}


def _train_closed_form(supernet, activations, cfg) -> Dict[str, List[np.ndarray]]:
    updates = {}
    for stitch_id in supernet.stitch_ids:
        spec = supernet.graph.nodes[stitch_id].spec
        x = _as_rows(activations[supernet.stitch_donor(stitch_id)])
        y = _as_rows(activations[supernet.stitch_target(stitch_id)])
        try:
            weight, bias = solve_stitch_least_squares(x, y, cfg.ridge)
        except SingularSystemError as e:
            raise SingularSystemError(f"{stitch_id}: {e}") from None
        updates[stitch_id] = _to_layer_weights(spec, weight, bias)
    return updates


def _train_adam(supernet, activations, cfg, samples: int) -> Dict[str, List[np.ndarray]]:
    rng = np.random.default_rng(cfg.seed)
    steps = math.ceil(cfg.sample_budget / cfg.batch_size)
    batch = min(cfg.batch_size, samples)
    params = {s: [np.array(w) for w in supernet.graph.nodes[s].weights] for s in supernet.stitch_ids}
    states = {s: AdamState() for s in supernet.stitch_ids}
    order = np.empty(0, dtype=np.int64)
    for step in range(1, steps + 1):
        while order.size < batch:
            order = np.concatenate([order, rng.permutation(samples)])
        index, order = order[:batch], order[batch:]
        total = 0.0
        for stitch_id in supernet.stitch_ids:
            spec = supernet.graph.nodes[stitch_id].spec
            x = activations[supernet.stitch_donor(stitch_id)][index]
            y = activations[supernet.stitch_target(stitch_id)][index]
            pred = forward_layer(spec, params[stitch_id], [x])
            diff = pred - y
            loss = float(np.mean(diff.astype(np.float64) ** 2))
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"{stitch_id}: stitch loss became non-finite at step {step}")
            total += loss
            grad = (2.0 / diff.size) * diff
            _, w_grads = backward_layer(spec, params[stitch_id], [x], grad.astype(np.float32))
            params[stitch_id], states[stitch_id] = adam_step(params[stitch_id], w_grads, states[stitch_id], cfg.lr)
        if step % 100 == 0:
            logger.debug(f"[STITCH TRAINING] step {step}/{steps}: summed MSE {total:.6f}")
    return params


def train_stitches(supernet: Supernetwork, dataset, cfg: Optional[StitchTrainConfig] = None
                   ) -> Tuple[Supernetwork, StitchTrainingReport]:
    """Fit every stitch to reproduce its recipient layer's output.

    Returns:
        The supernetwork with trained stitch weights and a per-stitch report of
        sample count, initial and final MSE.
    """
    cfg = cfg or StitchTrainConfig()
    samples, _ = dataset.split("train", cfg.max_samples)
    if samples.shape[0] == 0:
        raise ConfigurationError(f"dataset '{dataset.name}' has an empty train split")
    if not supernet.stitch_ids:
        logger.info("[STITCH TRAINING] No stitches to train")
        return supernet, StitchTrainingReport(method=cfg.method, samples=int(samples.shape[0]), stitches=[])

    logger.info(
        f"[STITCH TRAINING] {len(supernet.stitch_ids)} stitch(es), method={cfg.method}, "
        f"{samples.shape[0]} samples"
    )
    activations = capture_activations(supernet, samples)

    initial = {
        s: stitch_mse(supernet.graph.nodes[s].spec, supernet.graph.nodes[s].weights,
                      activations[supernet.stitch_donor(s)], activations[supernet.stitch_target(s)])
        for s in supernet.stitch_ids
    }
    if cfg.method == "closed_form":
        updates = _train_closed_form(supernet, activations, cfg)
    else:
        updates = _train_adam(supernet, activations, cfg, samples.shape[0])

    reports = []
    for stitch_id in supernet.stitch_ids:
        spec = supernet.graph.nodes[stitch_id].spec
        mse = stitch_mse(spec, updates[stitch_id], activations[supernet.stitch_donor(stitch_id)],
                         activations[supernet.stitch_target(stitch_id)])
        if not np.isfinite(mse):
            raise TrainingDivergedError(f"{stitch_id}: final MSE is non-finite")
        reports.append(StitchReport(stitch_id=stitch_id, samples=int(samples.shape[0]), mse=mse,
                                    initial_mse=initial[stitch_id], method=cfg.method))

    trained = supernet.with_stitch_weights(updates)
    improved = sum(r.mse < r.initial_mse for r in reports)
    logger.info(f"[STITCH TRAINING] {improved}/{len(reports)} stitch(es) improved on their random init")
    return trained, StitchTrainingReport(method=cfg.method, samples=int(samples.shape[0]), stitches=reports)
