"""Tensors, layer semantics and the Adam optimizer."""

from .layers import (
    LayerKind,
    LayerSpec,
    Shape,
    Tensor,
    as_tensor,
    backward_layer,
    forward_layer,
    init_weights,
    madds_of_layer,
    output_shape,
)
from .optim import AdamState, adam_step

__all__ = [
    "AdamState",
    "LayerKind",
    "LayerSpec",
    "Shape",
    "Tensor",
    "adam_step",
    "as_tensor",
    "backward_layer",
    "forward_layer",
    "init_weights",
    "madds_of_layer",
    "output_shape",
]
