"""
Directed acyclic computation graphs over layer specifications.

A :class:`NetworkGraph` is immutable after construction. Weight arrays are
stored as read-only views so a frozen parent can never be modified in place
by anything that borrows it (stitch training, decoding, evaluation).

Execution order is the lexicographic topological order computed with
networkx, so ties between independent nodes are always broken by node id.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np

from ..errors import CycleError, GraphError, ShapeMismatchError
from ..tensorcore import (
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

logger = logging.getLogger(__name__)

ActivationRecord = Dict[str, Tensor]


def _frozen(array: np.ndarray) -> np.ndarray:
    view = np.asarray(array, dtype=np.float32).view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True)
class TaskSignature:
    """Per-sample input shape and number of classes of a classification task."""

    input_shape: Tuple[int, ...]
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(int(d) for d in self.input_shape))
        if not self.input_shape or min(self.input_shape) < 1:
            raise GraphError(f"invalid task input shape {list(self.input_shape)}")
        if self.num_classes < 2:
            raise GraphError(f"a task needs at least 2 classes, got {self.num_classes}")


@dataclass(frozen=True, eq=False)
class GraphNode:
    """One layer of a graph with its ordered inputs and weights."""

    id: str
    spec: LayerSpec
    inputs: Tuple[str, ...] = ()
    weights: Tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "weights", tuple(_frozen(w) for w in self.weights))


@dataclass(frozen=True, eq=False)
class NetworkGraph:
    """Immutable DAG of typed layer nodes.

    ``nodes`` keeps insertion order; that order is what the container file
    stores, which keeps save/load/save byte-identical.
    """

    name: str
    task: TaskSignature
    nodes: Mapping[str, GraphNode]
    input_node: str
    output_node: str
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", dict(self.nodes))
        object.__setattr__(self, "metadata", dict(self.metadata))
        self._validate_structure()

    def _validate_structure(self) -> None:
        if self.input_node not in self.nodes:
            raise GraphError(f"{self.name}: input node '{self.input_node}' is missing")
        if self.output_node not in self.nodes:
            raise GraphError(f"{self.name}: output node '{self.output_node}' is missing")
        for node_id, node in self.nodes.items():
            if node.id != node_id:
                raise GraphError(f"{self.name}: node stored under '{node_id}' has id '{node.id}'")
            is_input = node.spec.kind == LayerKind.INPUT
            if is_input and node_id != self.input_node:
                raise GraphError(f"{self.name}: extra input node '{node_id}'")
            if not is_input and node_id == self.input_node:
                raise GraphError(f"{self.name}: input node '{node_id}' must have kind Input")
            if len(node.inputs) != node.spec.arity:
                raise GraphError(
                    f"{self.name}: node '{node_id}' ({node.spec.kind.value}) expects "
                    f"{node.spec.arity} input(s), has {len(node.inputs)}"
                )
            for src in node.inputs:
                if src not in self.nodes:
                    raise GraphError(f"{self.name}: node '{node_id}' reads unknown node '{src}'")
            expected = node.spec.weight_shapes()
            if len(node.weights) != len(expected) or any(
                tuple(w.shape) != tuple(s) for w, s in zip(node.weights, expected)
            ):
                raise GraphError(
                    f"{self.name}: node '{node_id}' weights {[list(w.shape) for w in node.weights]} "
                    f"do not match {[list(s) for s in expected]}"
                )

    # Structure ----------------------------------------------------------

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: str) -> GraphNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise GraphError(f"{self.name}: no node '{node_id}'") from None

    @cached_property
    def dag(self) -> nx.DiGraph:
        """The graph as a networkx digraph with an edge from each input to its consumer."""
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for node_id, node in self.nodes.items():
            for src in node.inputs:
                g.add_edge(src, node_id)
        return g

    @cached_property
    def order(self) -> Tuple[str, ...]:
        return tuple(topological_order(self))

    @cached_property
    def consumers(self) -> Dict[str, List[str]]:
        result: Dict[str, List[str]] = {node_id: [] for node_id in self.nodes}
        for node_id in self.order:
            for src in self.nodes[node_id].inputs:
                if node_id not in result[src]:
                    result[src].append(node_id)
        return result

    @cached_property
    def shapes(self) -> Dict[str, Shape]:
        """Per-node output shapes at batch size 1."""
        return infer_shapes(self, batch=1)

    def parameter_count(self) -> int:
        return int(sum(w.size for node in self.nodes.values() for w in node.weights))

    def with_weights(self, updates: Mapping[str, Sequence[np.ndarray]]) -> "NetworkGraph":
        """A copy of this graph with the weights of some nodes replaced."""
        nodes = {}
        for node_id, node in self.nodes.items():
            if node_id in updates:
                node = GraphNode(node_id, node.spec, node.inputs, tuple(updates[node_id]))
            nodes[node_id] = node
        unknown = set(updates) - set(self.nodes)
        if unknown:
            raise GraphError(f"{self.name}: cannot update unknown nodes {sorted(unknown)}")
        return NetworkGraph(self.name, self.task, nodes, self.input_node, self.output_node, self.metadata)

    def renamed(self, name: str) -> "NetworkGraph":
        return NetworkGraph(name, self.task, self.nodes, self.input_node, self.output_node, self.metadata)


class GraphBuilder:
    """Incremental construction of a :class:`NetworkGraph`.

    Example:
        >>> b = GraphBuilder("mlp", TaskSignature((2,), 2))
        >>> h = b.add("fc1", LayerSpec.linear(2, 8), [b.input_id])
        >>> b.set_output(b.add("fc2", LayerSpec.linear(8, 2), [h]))
        >>> graph = b.build(rng=np.random.default_rng(0))
    """

    def __init__(self, name: str, task: TaskSignature, input_id: str = "input"):
        self.name = name
        self.task = task
        self.input_id = input_id
        self._nodes: Dict[str, Tuple[LayerSpec, Tuple[str, ...], Optional[List[np.ndarray]]]] = {
            input_id: (LayerSpec.input(), (), [])
        }
        self._output: Optional[str] = None

    def add(self, node_id: str, spec: LayerSpec, inputs: Sequence[str],
            weights: Optional[Sequence[np.ndarray]] = None) -> str:
        if node_id in self._nodes:
            raise GraphError(f"{self.name}: duplicate node id '{node_id}'")
        self._nodes[node_id] = (spec, tuple(inputs), list(weights) if weights is not None else None)
        return node_id

    def set_output(self, node_id: str) -> None:
        self._output = node_id

    def build(self, rng: Optional[np.random.Generator] = None, gain: float = 2.0) -> NetworkGraph:
        """Create the graph, drawing missing weights from ``rng``.

        Raises:
            GraphError: when weights are missing and no generator is given
            ShapeMismatchError: when shapes do not propagate from the input
        """
        if self._output is None:
            raise GraphError(f"{self.name}: no output node set")
        nodes = {}
        for node_id, (spec, inputs, weights) in self._nodes.items():
            if weights is None:
                if rng is None and spec.weight_shapes():
                    raise GraphError(f"{self.name}: node '{node_id}' has no weights and no rng was given")
                weights = init_weights(spec, rng, gain=gain) if rng is not None else []
            nodes[node_id] = GraphNode(node_id, spec, inputs, tuple(weights))
        graph = NetworkGraph(self.name, self.task, nodes, self.input_id, self._output)
        infer_shapes(graph)
        return graph


# Ordering ---------------------------------------------------------------

def topological_order(graph: NetworkGraph) -> List[str]:
    """Node ids such that every edge goes from an earlier to a later node.

    Raises:
        CycleError: listing the node ids of one cycle.
    """
    try:
        return list(nx.lexicographical_topological_sort(graph.dag))
    except nx.NetworkXUnfeasible:
        cycle = [edge[0] for edge in nx.find_cycle(graph.dag)]
        raise CycleError(f"{graph.name}: graph contains a cycle through {cycle}", cycle) from None


def infer_shapes(graph: NetworkGraph, batch: int = 1) -> Dict[str, Shape]:
    """Propagate shapes from the declared input shape through every node."""
    shapes: Dict[str, Shape] = {graph.input_node: (batch,) + graph.task.input_shape}
    for node_id in graph.order:
        node = graph.nodes[node_id]
        if node_id == graph.input_node:
            continue
        try:
            shapes[node_id] = output_shape(node.spec, [shapes[src] for src in node.inputs])
        except ShapeMismatchError as e:
            raise ShapeMismatchError(f"{graph.name}: node '{node_id}': {e}") from e
    return shapes


def live_nodes(graph: NetworkGraph, selections: Optional[Mapping[str, int]] = None) -> Set[str]:
    """Nodes the output depends on, following only the selected input of each switch."""
    selections = selections or {}
    seen: Set[str] = set()
    stack = [graph.output_node]
    while stack:
        node_id = stack.pop()
        if node_id in seen:
            continue
        seen.add(node_id)
        node = graph.nodes[node_id]
        if node.spec.kind == LayerKind.SWITCH:
            stack.append(node.inputs[selections.get(node_id, node.spec.selected)])
        else:
            stack.extend(node.inputs)
    return seen


# Execution --------------------------------------------------------------

def _spec_for(graph: NetworkGraph, node: GraphNode, selections: Optional[Mapping[str, int]]) -> LayerSpec:
    if selections and node.id in selections:
        if node.spec.kind != LayerKind.SWITCH:
            raise GraphError(f"{graph.name}: selection given for non-switch node '{node.id}'")
        choice = int(selections[node.id])
        if not 0 <= choice < node.spec.num_inputs:
            raise GraphError(f"{graph.name}: selection {choice} out of range for switch '{node.id}'")
        return LayerSpec.switch(node.spec.num_inputs, choice)
    return node.spec


def _check_batch(graph: NetworkGraph, batch: Tensor) -> Tensor:
    batch = as_tensor(batch)
    if tuple(batch.shape[1:]) != graph.task.input_shape:
        raise ShapeMismatchError(
            f"{graph.name}: batch shape {list(batch.shape)} does not match input "
            f"[B, {', '.join(str(d) for d in graph.task.input_shape)}]"
        )
    return batch


def forward(graph: NetworkGraph, batch: Tensor, capture: bool = False,
            selections: Optional[Mapping[str, int]] = None
            ) -> Union[Tensor, Tuple[Tensor, ActivationRecord]]:
    """Run the graph on ``batch``.

    Args:
        graph: the network to execute
        batch: input tensor, batch axis first
        capture: when true, execute every node and also return their outputs
        selections: optional switch-id -> selected input overrides

    Returns:
        The output node's value, or ``(output, record)`` when ``capture`` is set.
    """
    batch = _check_batch(graph, batch)
    needed = set(graph.nodes) if capture else live_nodes(graph, selections)
    values: ActivationRecord = {graph.input_node: batch}
    for node_id in graph.order:
        if node_id == graph.input_node or node_id not in needed:
            continue
        node = graph.nodes[node_id]
        spec = _spec_for(graph, node, selections)
        if spec.kind == LayerKind.SWITCH and not capture:
            values[node_id] = values[node.inputs[spec.selected]]
            continue
        try:
            values[node_id] = forward_layer(spec, node.weights, [values[src] for src in node.inputs])
        except ShapeMismatchError as e:
            raise ShapeMismatchError(f"{graph.name}: node '{node_id}': {e}") from e
    output = values[graph.output_node]
    if capture:
        return output, values
    return output


def backward(graph: NetworkGraph, batch: Tensor, output_grad: Tensor,
             record: Optional[ActivationRecord] = None) -> Dict[str, List[Tensor]]:
    """Weight gradients of every parameterised node given the gradient at the output.

    ``record`` may carry the activations of a previous ``forward(capture=True)``
    on the same batch to avoid recomputing them.
    """
    if record is None:
        _, record = forward(graph, batch, capture=True)
    grads: Dict[str, Tensor] = {graph.output_node: np.asarray(output_grad, dtype=np.float32)}
    weight_grads: Dict[str, List[Tensor]] = {}
    for node_id in reversed(graph.order):
        if node_id not in grads or node_id == graph.input_node:
            continue
        node = graph.nodes[node_id]
        input_grads, w_grads = backward_layer(
            node.spec, node.weights, [record[src] for src in node.inputs], grads.pop(node_id)
        )
        if node.weights:
            weight_grads[node_id] = w_grads
        for src, g in zip(node.inputs, input_grads):
            grads[src] = grads[src] + g if src in grads else g
    return weight_grads


# Cost -------------------------------------------------------------------

def network_madds(graph: NetworkGraph, input_shape: Optional[Shape] = None) -> int:
    """Total multiply-adds of one forward pass at batch size 1."""
    if input_shape is not None and tuple(input_shape) != graph.task.input_shape:
        raise ShapeMismatchError(
            f"{graph.name}: input shape {list(input_shape)} differs from {list(graph.task.input_shape)}"
        )
    shapes = graph.shapes
    total = 0
    for node_id in graph.order:
        node = graph.nodes[node_id]
        if node_id == graph.input_node:
            continue
        total += madds_of_layer(node.spec, [shapes[src] for src in node.inputs])
    return total


def prune_dead(graph: NetworkGraph) -> NetworkGraph:
    """Drop every node that has no path to the output node."""
    keep = nx.ancestors(graph.dag, graph.output_node) | {graph.output_node, graph.input_node}
    if len(keep) == len(graph.nodes):
        return graph
    removed = len(graph.nodes) - len(keep)
    logger.debug(f"[PRUNE] {graph.name}: removing {removed} dead node(s)")
    nodes = {node_id: node for node_id, node in graph.nodes.items() if node_id in keep}
    return NetworkGraph(graph.name, graph.task, nodes, graph.input_node, graph.output_node, graph.metadata)


# Verification -----------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceReport:
    max_abs_diff: float
    passed: bool
    per_pair: Tuple[float, ...] = ()


def verify_equivalence(graph: NetworkGraph, reference_outputs: Iterable[Tuple[Tensor, Tensor]],
                       tol: float = 1e-5) -> EquivalenceReport:
    """Compare the graph's outputs against recorded (input, output) pairs."""
    diffs = []
    for inputs, expected in reference_outputs:
        actual = forward(graph, inputs)
        expected = np.asarray(expected, dtype=np.float32)
        if actual.shape != expected.shape:
            raise ShapeMismatchError(
                f"{graph.name}: output shape {list(actual.shape)} vs reference {list(expected.shape)}"
            )
        diffs.append(float(np.max(np.abs(actual.astype(np.float64) - expected))) if actual.size else 0.0)
    worst = float(np.max(diffs)) if diffs else 0.0
    passed = bool(np.isfinite(worst) and worst <= tol)
    if not passed:
        logger.warning(f"[VERIFY] {graph.name}: max abs diff {worst:.3e} exceeds tolerance {tol}")
    return EquivalenceReport(max_abs_diff=worst, passed=passed, per_pair=tuple(diffs))
