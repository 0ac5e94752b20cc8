"""
Layer specifications and their forward, backward and cost semantics.

Tensors are plain ``numpy`` arrays of ``float32`` in row-major layout. The
first axis is always the batch axis. Image tensors use the ``[B, C, H, W]``
layout. Every function in this module is pure: given identical inputs and
weights it returns bit-identical outputs.

Linear layers compute ``y = x @ W + b`` with ``W`` of shape ``[in, out]``,
which is also the layout produced by the stitch least-squares solver.
"""

import logging
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, ConfigDict, model_validator

from ..errors import ShapeMismatchError

logger = logging.getLogger(__name__)

Tensor = npt.NDArray[np.float32]
Shape = Tuple[int, ...]


class LayerKind(str, Enum):
    """Every node kind a network graph may contain."""

    INPUT = "Input"
    LINEAR = "Linear"
    CONV2D = "Conv2D"
    RELU = "ReLU"
    MAXPOOL2D = "MaxPool2D"
    AVGPOOL2D = "AvgPool2D"
    GLOBALAVGPOOL2D = "GlobalAvgPool2D"
    FLATTEN = "Flatten"
    ADD = "Add"
    CONCAT = "Concat"
    BATCHNORM2D = "BatchNorm2DInference"
    SOFTMAX = "Softmax"
    # Structural kinds used by merged and decoded graphs.
    SWITCH = "Switch"
    MEAN = "Mean"


_MULTI_INPUT = {LayerKind.ADD, LayerKind.CONCAT, LayerKind.MEAN, LayerKind.SWITCH}
_TRAINABLE = {
    LayerKind.LINEAR: (0, 1),
    LayerKind.CONV2D: (0, 1),
    LayerKind.BATCHNORM2D: (0, 1),
}


class LayerSpec(BaseModel):
    """Kind plus hyperparameters of a single layer.

    Only the fields relevant to ``kind`` are set; the rest stay ``None`` so the
    serialized form lists exactly the hyperparameters the layer uses.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: LayerKind
    in_features: Optional[int] = None
    out_features: Optional[int] = None
    in_channels: Optional[int] = None
    out_channels: Optional[int] = None
    kernel_size: Optional[Tuple[int, int]] = None
    stride: Optional[int] = None
    padding: Optional[int] = None
    window: Optional[int] = None
    axis: Optional[int] = None
    num_inputs: Optional[int] = None
    selected: Optional[int] = None
    eps: Optional[float] = None

    @model_validator(mode="after")
    def _check_hyperparams(self) -> "LayerSpec":
        required = {
            LayerKind.LINEAR: ("in_features", "out_features"),
            LayerKind.CONV2D: ("in_channels", "out_channels", "kernel_size", "stride", "padding"),
            LayerKind.MAXPOOL2D: ("window", "stride"),
            LayerKind.AVGPOOL2D: ("window", "stride"),
            LayerKind.ADD: ("num_inputs",),
            LayerKind.CONCAT: ("num_inputs", "axis"),
            LayerKind.MEAN: ("num_inputs",),
            LayerKind.SWITCH: ("num_inputs", "selected"),
            LayerKind.BATCHNORM2D: ("in_channels", "eps"),
        }.get(self.kind, ())
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind.value} requires hyperparameters: {', '.join(missing)}")
        for name in ("in_features", "out_features", "in_channels", "out_channels", "window", "stride"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{self.kind.value}: {name} must be positive, got {value}")
        if self.padding is not None and self.padding < 0:
            raise ValueError(f"{self.kind.value}: padding must be non-negative")
        if self.kernel_size is not None and min(self.kernel_size) < 1:
            raise ValueError(f"{self.kind.value}: kernel_size must be positive")
        if self.kind in (LayerKind.ADD, LayerKind.CONCAT, LayerKind.MEAN) and self.num_inputs < 2:
            raise ValueError(f"{self.kind.value} needs at least 2 inputs")
        if self.kind == LayerKind.SWITCH:
            if self.num_inputs < 1:
                raise ValueError("Switch needs at least 1 input")
            if not 0 <= self.selected < self.num_inputs:
                raise ValueError(f"Switch selection {self.selected} outside [0, {self.num_inputs})")
        return self

    # Constructors -------------------------------------------------------

    @classmethod
    def input(cls) -> "LayerSpec":
        return cls(kind=LayerKind.INPUT)

    @classmethod
    def linear(cls, in_features: int, out_features: int) -> "LayerSpec":
        return cls(kind=LayerKind.LINEAR, in_features=in_features, out_features=out_features)

    @classmethod
    def conv2d(cls, in_channels: int, out_channels: int, kernel: int = 3,
               stride: int = 1, padding: int = 0) -> "LayerSpec":
        return cls(kind=LayerKind.CONV2D, in_channels=in_channels, out_channels=out_channels,
                   kernel_size=(kernel, kernel), stride=stride, padding=padding)

    @classmethod
    def relu(cls) -> "LayerSpec":
        return cls(kind=LayerKind.RELU)

    @classmethod
    def max_pool(cls, window: int = 2, stride: Optional[int] = None) -> "LayerSpec":
        return cls(kind=LayerKind.MAXPOOL2D, window=window, stride=stride or window)

    @classmethod
    def avg_pool(cls, window: int = 2, stride: Optional[int] = None) -> "LayerSpec":
        return cls(kind=LayerKind.AVGPOOL2D, window=window, stride=stride or window)

    @classmethod
    def global_avg_pool(cls) -> "LayerSpec":
        return cls(kind=LayerKind.GLOBALAVGPOOL2D)

    @classmethod
    def flatten(cls) -> "LayerSpec":
        return cls(kind=LayerKind.FLATTEN)

    @classmethod
    def add(cls, num_inputs: int = 2) -> "LayerSpec":
        return cls(kind=LayerKind.ADD, num_inputs=num_inputs)

    @classmethod
    def concat(cls, num_inputs: int = 2, axis: int = 1) -> "LayerSpec":
        return cls(kind=LayerKind.CONCAT, num_inputs=num_inputs, axis=axis)

    @classmethod
    def batch_norm(cls, channels: int, eps: float = 1e-5) -> "LayerSpec":
        return cls(kind=LayerKind.BATCHNORM2D, in_channels=channels, eps=eps)

    @classmethod
    def softmax(cls) -> "LayerSpec":
        return cls(kind=LayerKind.SOFTMAX)

    @classmethod
    def switch(cls, num_inputs: int, selected: int = 0) -> "LayerSpec":
        return cls(kind=LayerKind.SWITCH, num_inputs=num_inputs, selected=selected)

    @classmethod
    def mean(cls, num_inputs: int = 2) -> "LayerSpec":
        return cls(kind=LayerKind.MEAN, num_inputs=num_inputs)

    # Properties ---------------------------------------------------------

    @property
    def arity(self) -> int:
        if self.kind == LayerKind.INPUT:
            return 0
        if self.kind in _MULTI_INPUT:
            return self.num_inputs
        return 1

    @property
    def trainable_indices(self) -> Tuple[int, ...]:
        """Indices into the weight list that gradient descent may update."""
        return _TRAINABLE.get(self.kind, ())

    def hyperparams(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude={"kind"}, exclude_none=True)

    def weight_shapes(self) -> List[Shape]:
        if self.kind == LayerKind.LINEAR:
            return [(self.in_features, self.out_features), (self.out_features,)]
        if self.kind == LayerKind.CONV2D:
            kh, kw = self.kernel_size
            return [(self.out_channels, self.in_channels, kh, kw), (self.out_channels,)]
        if self.kind == LayerKind.BATCHNORM2D:
            # gamma, beta, running mean, running variance
            return [(self.in_channels,)] * 4
        return []

    def describe(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.hyperparams().items())
        return f"{self.kind.value}({params})"


def as_tensor(value: Any) -> Tensor:
    """Convert ``value`` to a contiguous float32 array with at least one axis."""
    array = np.ascontiguousarray(value, dtype=np.float32)
    if array.ndim == 0:
        raise ShapeMismatchError("tensors need at least one (batch) dimension")
    return array


def init_weights(spec: LayerSpec, rng: np.random.Generator, gain: float = 2.0) -> List[Tensor]:
    """Random weights for ``spec``: N(0, gain / fan_in) kernels and zero biases."""
    if spec.kind == LayerKind.LINEAR:
        std = np.sqrt(gain / spec.in_features)
        weight = rng.normal(0.0, std, size=(spec.in_features, spec.out_features))
        return [weight.astype(np.float32), np.zeros(spec.out_features, dtype=np.float32)]
    if spec.kind == LayerKind.CONV2D:
        kh, kw = spec.kernel_size
        std = np.sqrt(gain / (spec.in_channels * kh * kw))
        weight = rng.normal(0.0, std, size=(spec.out_channels, spec.in_channels, kh, kw))
        return [weight.astype(np.float32), np.zeros(spec.out_channels, dtype=np.float32)]
    if spec.kind == LayerKind.BATCHNORM2D:
        c = spec.in_channels
        return [np.ones(c, np.float32), np.zeros(c, np.float32),
                np.zeros(c, np.float32), np.ones(c, np.float32)]
    return []


# Shapes -----------------------------------------------------------------

def _fail(spec: LayerSpec, detail: str) -> ShapeMismatchError:
    return ShapeMismatchError(f"{spec.describe()}: {detail}")


def _pool_out(size: int, window: int, stride: int, padding: int = 0) -> int:
    return (size + 2 * padding - window) // stride + 1


def output_shape(spec: LayerSpec, input_shapes: Sequence[Shape]) -> Shape:
    """Shape produced by ``spec`` on inputs of ``input_shapes``.

    Raises:
        ShapeMismatchError: naming the layer and the offending dimensions.
    """
    shapes = [tuple(int(d) for d in s) for s in input_shapes]
    if len(shapes) != spec.arity:
        raise _fail(spec, f"expected {spec.arity} input(s), got {len(shapes)}")
    kind = spec.kind
    if kind == LayerKind.INPUT:
        raise _fail(spec, "input nodes have no computed output shape")
    first = shapes[0]

    if kind == LayerKind.LINEAR:
        if len(first) != 2 or first[1] != spec.in_features:
            raise _fail(spec, f"expected input [B, {spec.in_features}], got {list(first)}")
        return (first[0], spec.out_features)

    if kind in (LayerKind.CONV2D, LayerKind.MAXPOOL2D, LayerKind.AVGPOOL2D,
                LayerKind.GLOBALAVGPOOL2D, LayerKind.BATCHNORM2D):
        if len(first) != 4:
            raise _fail(spec, f"expected a 4-d input [B, C, H, W], got {list(first)}")
        b, c, h, w = first
        if kind == LayerKind.CONV2D:
            if c != spec.in_channels:
                raise _fail(spec, f"expected {spec.in_channels} input channels, got {c}")
            kh, kw = spec.kernel_size
            ho = _pool_out(h, kh, spec.stride, spec.padding)
            wo = _pool_out(w, kw, spec.stride, spec.padding)
            if ho < 1 or wo < 1:
                raise _fail(spec, f"kernel {kh}x{kw} does not fit spatial size {h}x{w}")
            return (b, spec.out_channels, ho, wo)
        if kind == LayerKind.BATCHNORM2D:
            if c != spec.in_channels:
                raise _fail(spec, f"expected {spec.in_channels} channels, got {c}")
            return first
        if kind == LayerKind.GLOBALAVGPOOL2D:
            return (b, c)
        ho = _pool_out(h, spec.window, spec.stride)
        wo = _pool_out(w, spec.window, spec.stride)
        if ho < 1 or wo < 1:
            raise _fail(spec, f"window {spec.window} does not fit spatial size {h}x{w}")
        return (b, c, ho, wo)

    if kind in (LayerKind.RELU, LayerKind.SOFTMAX):
        return first

    if kind == LayerKind.FLATTEN:
        return (first[0], int(np.prod(first[1:], dtype=np.int64)))

    if kind in (LayerKind.ADD, LayerKind.MEAN):
        for other in shapes[1:]:
            if other != first:
                raise _fail(spec, f"all inputs must share a shape, got {[list(s) for s in shapes]}")
        return first

    if kind == LayerKind.CONCAT:
        axis = spec.axis
        if not 0 < axis < len(first):
            raise _fail(spec, f"concat axis {axis} invalid for rank {len(first)}")
        total = 0
        for other in shapes:
            if len(other) != len(first) or any(
                other[i] != first[i] for i in range(len(first)) if i != axis
            ):
                raise _fail(spec, f"inputs differ outside axis {axis}: {[list(s) for s in shapes]}")
            total += other[axis]
        out = list(first)
        out[axis] = total
        return tuple(out)

    if kind == LayerKind.SWITCH:
        return shapes[spec.selected]

    raise _fail(spec, "unsupported layer kind")


def _check_weights(spec: LayerSpec, weights: Optional[Sequence[Tensor]]) -> List[Tensor]:
    expected = spec.weight_shapes()
    weights = list(weights or [])
    if len(weights) != len(expected):
        raise _fail(spec, f"expected {len(expected)} weight tensor(s), got {len(weights)}")
    for i, (w, shape) in enumerate(zip(weights, expected)):
        if tuple(w.shape) != tuple(shape):
            raise _fail(spec, f"weight {i} has shape {list(w.shape)}, expected {list(shape)}")
    return weights


# Forward ----------------------------------------------------------------

def _windows(x: Tensor, kh: int, kw: int, stride: int, padding: int = 0) -> np.ndarray:
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    view = sliding_window_view(x, (kh, kw), axis=(2, 3))
    return view[:, :, ::stride, ::stride]


def forward_layer(spec: LayerSpec, weights: Optional[Sequence[Tensor]], inputs: Sequence[Tensor]) -> Tensor:
    """Apply one layer.

    Args:
        spec: layer kind and hyperparameters
        weights: weight tensors in the order of ``spec.weight_shapes()``
        inputs: input tensors, ``spec.arity`` of them

    Returns:
        A new float32 tensor of the shape given by :func:`output_shape`.
    """
    output_shape(spec, [x.shape for x in inputs])
    weights = _check_weights(spec, weights)
    kind = spec.kind
    x = inputs[0] if inputs else None

    if kind == LayerKind.LINEAR:
        out = x @ weights[0] + weights[1]
    elif kind == LayerKind.CONV2D:
        kh, kw = spec.kernel_size
        win = _windows(x, kh, kw, spec.stride, spec.padding)
        out = np.tensordot(win, weights[0], axes=([1, 4, 5], [1, 2, 3]))
        out = out.transpose(0, 3, 1, 2) + weights[1][None, :, None, None]
    elif kind == LayerKind.RELU:
        out = np.maximum(x, np.float32(0.0))
    elif kind == LayerKind.MAXPOOL2D:
        out = _windows(x, spec.window, spec.window, spec.stride).max(axis=(4, 5))
    elif kind == LayerKind.AVGPOOL2D:
        out = _windows(x, spec.window, spec.window, spec.stride).mean(axis=(4, 5), dtype=np.float32)
    elif kind == LayerKind.GLOBALAVGPOOL2D:
        out = x.mean(axis=(2, 3), dtype=np.float32)
    elif kind == LayerKind.FLATTEN:
        out = x.reshape(x.shape[0], -1)
    elif kind == LayerKind.ADD:
        out = inputs[0].copy()
        for other in inputs[1:]:
            out = out + other
    elif kind == LayerKind.MEAN:
        out = inputs[0].copy()
        for other in inputs[1:]:
            out = out + other
        out = out / np.float32(len(inputs))
    elif kind == LayerKind.CONCAT:
        out = np.concatenate(inputs, axis=spec.axis)
    elif kind == LayerKind.BATCHNORM2D:
        gamma, beta, mean, var = weights
        scale = gamma / np.sqrt(var + np.float32(spec.eps))
        out = (x - mean[None, :, None, None]) * scale[None, :, None, None] + beta[None, :, None, None]
    elif kind == LayerKind.SOFTMAX:
        shifted = x - x.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        out = exp / exp.sum(axis=1, keepdims=True)
    elif kind == LayerKind.SWITCH:
        out = inputs[spec.selected].copy()
    else:
        raise _fail(spec, "layer kind cannot be executed")
    return np.ascontiguousarray(out, dtype=np.float32)


# Backward ---------------------------------------------------------------

def _scatter_windows(dxp: np.ndarray, contrib: np.ndarray, i: int, j: int, stride: int) -> None:
    ho, wo = contrib.shape[2], contrib.shape[3]
    dxp[:, :, i:i + stride * (ho - 1) + 1:stride, j:j + stride * (wo - 1) + 1:stride] += contrib


def backward_layer(spec: LayerSpec, weights: Optional[Sequence[Tensor]], inputs: Sequence[Tensor],
                   upstream_grad: Tensor) -> Tuple[List[Tensor], List[Tensor]]:
    """Gradients of a layer with respect to its inputs and weights.

    Returns:
        ``(input_grads, weight_grads)`` with shapes matching ``inputs`` and
        ``weights``. BatchNorm running statistics are frozen and always get a
        zero gradient.
    """
    out_shape = output_shape(spec, [x.shape for x in inputs])
    if tuple(upstream_grad.shape) != tuple(out_shape):
        raise _fail(spec, f"upstream gradient {list(upstream_grad.shape)} does not match output {list(out_shape)}")
    weights = _check_weights(spec, weights)
    g = np.asarray(upstream_grad, dtype=np.float32)
    kind = spec.kind
    x = inputs[0] if inputs else None

    if kind == LayerKind.LINEAR:
        dx = g @ weights[0].T
        return [dx], [x.T @ g, g.sum(axis=0)]

    if kind == LayerKind.CONV2D:
        kh, kw = spec.kernel_size
        s, p = spec.stride, spec.padding
        win = _windows(x, kh, kw, s, p)
        d_weight = np.tensordot(g, win, axes=([0, 2, 3], [0, 2, 3]))
        d_bias = g.sum(axis=(0, 2, 3))
        cols = np.tensordot(g, weights[0], axes=([1], [0]))  # [B, Ho, Wo, C, kh, kw]
        b, c, h, w = x.shape
        dxp = np.zeros((b, c, h + 2 * p, w + 2 * p), dtype=np.float32)
        for i in range(kh):
            for j in range(kw):
                _scatter_windows(dxp, cols[:, :, :, :, i, j].transpose(0, 3, 1, 2), i, j, s)
        dx = dxp[:, :, p:p + h, p:p + w]
        return [np.ascontiguousarray(dx)], [d_weight.astype(np.float32), d_bias.astype(np.float32)]

    if kind == LayerKind.RELU:
        return [g * (x > 0)], []

    if kind == LayerKind.MAXPOOL2D:
        k, s = spec.window, spec.stride
        win = _windows(x, k, k, s)
        flat = win.reshape(*win.shape[:4], k * k)
        arg = flat.argmax(axis=-1)
        dx = np.zeros_like(x)
        for idx in range(k * k):
            i, j = divmod(idx, k)
            _scatter_windows(dx, g * (arg == idx), i, j, s)
        return [dx], []

    if kind == LayerKind.AVGPOOL2D:
        k, s = spec.window, spec.stride
        dx = np.zeros_like(x)
        share = g / np.float32(k * k)
        for i in range(k):
            for j in range(k):
                _scatter_windows(dx, share, i, j, s)
        return [dx], []

    if kind == LayerKind.GLOBALAVGPOOL2D:
        h, w = x.shape[2], x.shape[3]
        dx = np.broadcast_to(g[:, :, None, None] / np.float32(h * w), x.shape).copy()
        return [dx], []

    if kind == LayerKind.FLATTEN:
        return [g.reshape(x.shape).copy()], []

    if kind == LayerKind.ADD:
        return [g.copy() for _ in inputs], []

    if kind == LayerKind.MEAN:
        share = g / np.float32(len(inputs))
        return [share.copy() for _ in inputs], []

    if kind == LayerKind.CONCAT:
        bounds = np.cumsum([t.shape[spec.axis] for t in inputs])[:-1]
        return [part.copy() for part in np.split(g, bounds, axis=spec.axis)], []

    if kind == LayerKind.BATCHNORM2D:
        gamma, beta, mean, var = weights
        inv = 1.0 / np.sqrt(var + np.float32(spec.eps))
        x_hat = (x - mean[None, :, None, None]) * inv[None, :, None, None]
        dx = g * (gamma * inv)[None, :, None, None]
        d_gamma = (g * x_hat).sum(axis=(0, 2, 3))
        d_beta = g.sum(axis=(0, 2, 3))
        return [dx], [d_gamma.astype(np.float32), d_beta.astype(np.float32),
                      np.zeros_like(mean), np.zeros_like(var)]

    if kind == LayerKind.SOFTMAX:
        y = forward_layer(spec, weights, inputs)
        dx = y * (g - (g * y).sum(axis=1, keepdims=True))
        return [dx], []

    if kind == LayerKind.SWITCH:
        grads = [np.zeros_like(t) for t in inputs]
        grads[spec.selected] = g.copy()
        return grads, []

    raise _fail(spec, "layer kind has no backward pass")


# Cost -------------------------------------------------------------------

def madds_of_layer(spec: LayerSpec, input_shapes: Sequence[Shape]) -> int:
    """Multiply-adds of one layer; only Linear and Conv2D count."""
    out = output_shape(spec, input_shapes)
    if spec.kind == LayerKind.LINEAR:
        batch = int(input_shapes[0][0])
        return batch * spec.in_features * spec.out_features
    if spec.kind == LayerKind.CONV2D:
        kh, kw = spec.kernel_size
        b, c_out, h_out, w_out = out
        return int(b) * kh * kw * spec.in_channels * c_out * int(h_out) * int(w_out)
    return 0
