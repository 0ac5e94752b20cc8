"""Adam optimizer state and update step."""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import ShapeMismatchError
from .layers import Tensor


@dataclass
class AdamState:
    """First and second moment accumulators for one list of parameters."""

    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: Sequence[Tensor], **kwargs) -> "AdamState":
        return cls(
            m=[np.zeros_like(p, dtype=np.float32) for p in params],
            v=[np.zeros_like(p, dtype=np.float32) for p in params],
            **kwargs,
        )


def adam_step(params: Sequence[Tensor], grads: Sequence[Tensor], state: AdamState,
              lr: float = 1e-3) -> Tuple[List[Tensor], AdamState]:
    """One Adam update with bias correction.

    Args:
        params: current parameter tensors
        grads: gradients, one per parameter, same shapes
        state: moment accumulators from the previous step
        lr: learning rate

    Returns:
        New parameter tensors and the advanced state. Inputs are not mutated.
    """
    if len(params) != len(grads):
        raise ShapeMismatchError(f"adam_step: {len(params)} params but {len(grads)} grads")
    if not state.m:
        state = AdamState.zeros_like(params, beta1=state.beta1, beta2=state.beta2, eps=state.eps)
    if len(state.m) != len(params):
        raise ShapeMismatchError(f"adam_step: state tracks {len(state.m)} params, got {len(params)}")

    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** t
    correction2 = 1.0 - b2 ** t

    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise ShapeMismatchError(
                f"adam_step: parameter {list(p.shape)} vs gradient {list(g.shape)} vs state {list(m.shape)}"
            )
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        update = lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
        new_params.append((p - update).astype(np.float32))
        new_m.append(m.astype(np.float32))
        new_v.append(v.astype(np.float32))

    return new_params, AdamState(m=new_m, v=new_v, step=t, beta1=b1, beta2=b2, eps=state.eps)
