"""
Decoding genotypes into subnetworks and evaluating them.

Decoding walks backwards from the output switch. Every switch it reaches is
marked active and replaced by a direct edge to its selected input; every node
it never reaches is dropped. The output switch stays in the decoded graph as a
single-input pass-through so that the network output keeps a stable id.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import GenotypeError
from ..netgraph import GraphNode, NetworkGraph, network_madds
from ..stitcher import OUTPUT_SWITCH_ID, Supernetwork
from ..synthdata import accuracy_of, predict_logits, softmax
from ..tensorcore import LayerKind, LayerSpec
from .genotype import changed_indices, reference_genotype, to_digits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalResult:
    """Objectives of one genotype plus the switches that influenced them."""

    accuracy: float
    madds: int
    active_mask: Tuple[bool, ...]
    skipped: bool = False
    stitches: int = 0
    probabilities: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @property
    def active_indices(self) -> List[int]:
        return [i for i, active in enumerate(self.active_mask) if active]


def decode(supernet: Supernetwork, genotype: Sequence[int]) -> Tuple[NetworkGraph, np.ndarray]:
    """The subnetwork selected by ``genotype`` and its active-switch mask."""
    selections = supernet.selections(genotype)
    index = {s.id: i for i, s in enumerate(supernet.switches)}
    nodes = supernet.graph.nodes
    active = np.zeros(supernet.genotype_length, dtype=bool)

    def resolve(node_id: str) -> str:
        while nodes[node_id].spec.kind == LayerKind.SWITCH and node_id != OUTPUT_SWITCH_ID:
            active[index[node_id]] = True
            node_id = nodes[node_id].inputs[selections[node_id]]
        return node_id

    active[index[OUTPUT_SWITCH_ID]] = True
    head = resolve(nodes[OUTPUT_SWITCH_ID].inputs[selections[OUTPUT_SWITCH_ID]])
    rewired: Dict[str, Tuple[str, ...]] = {}
    stack = [head]
    while stack:
        node_id = stack.pop()
        if node_id in rewired:
            continue
        inputs = tuple(resolve(src) for src in nodes[node_id].inputs)
        rewired[node_id] = inputs
        stack.extend(inputs)

    decoded = {}
    for node_id, node in nodes.items():
        if node_id in rewired:
            decoded[node_id] = GraphNode(node_id, node.spec, rewired[node_id], node.weights)
    if supernet.graph.input_node not in decoded:
        decoded[supernet.graph.input_node] = nodes[supernet.graph.input_node]
    decoded[OUTPUT_SWITCH_ID] = GraphNode(OUTPUT_SWITCH_ID, LayerSpec.switch(1), (head,))

    graph = NetworkGraph(
        name=f"{supernet.graph.name}[{to_digits(supernet.check_genotype(genotype))}]",
        task=supernet.graph.task,
        nodes=decoded,
        input_node=supernet.graph.input_node,
        output_node=OUTPUT_SWITCH_ID,
    )
    return graph, active


def count_stitches(graph: NetworkGraph) -> int:
    return sum(1 for node_id in graph.nodes if node_id.startswith("stitch/"))


class Evaluator:
    """Evaluates genotypes of one supernetwork on a fixed data split.

    Args:
        supernet: trained supernetwork
        dataset: dataset with the requested split
        split: split name
        eval_limit: use only the first ``eval_limit`` samples of the split
        keep_probabilities: attach the softmax matrix to every result
    """

    def __init__(self, supernet: Supernetwork, dataset, split: str = "validation",
                 eval_limit: Optional[int] = None, keep_probabilities: bool = False):
        self.supernet = supernet
        self.split = split
        size = dataset.split_size(split)
        if eval_limit is not None and eval_limit > size:
            logger.debug(f"[EVALUATION] eval_limit {eval_limit} exceeds {split} size {size}; using all")
        self.samples, self.labels = dataset.split(split, eval_limit)
        self.keep_probabilities = keep_probabilities

    def __call__(self, genotype: Sequence[int]) -> EvalResult:
        return self.evaluate(genotype)

    def evaluate(self, genotype: Sequence[int]) -> EvalResult:
        graph, active = decode(self.supernet, genotype)
        logits = predict_logits(graph, self.samples)
        return EvalResult(
            accuracy=accuracy_of(logits, self.labels),
            madds=network_madds(graph),
            active_mask=tuple(bool(a) for a in active),
            stitches=count_stitches(graph),
            probabilities=softmax(logits.astype(np.float64)) if self.keep_probabilities else None,
        )


def evaluate(supernet: Supernetwork, genotype: Sequence[int], dataset, split: str = "validation",
             eval_limit: Optional[int] = None, keep_probabilities: bool = False) -> EvalResult:
    """Accuracy on the first ``eval_limit`` samples of ``split`` and per-sample madds."""
    return Evaluator(supernet, dataset, split, eval_limit, keep_probabilities).evaluate(genotype)


def maybe_skip(parent_result: EvalResult, parent_genotype: Sequence[int],
               child_genotype: Sequence[int]) -> Optional[EvalResult]:
    """Reuse ``parent_result`` when every changed gene belongs to an inactive switch."""
    changed = changed_indices(parent_genotype, child_genotype)
    mask = parent_result.active_mask
    if len(mask) != len(child_genotype):
        raise GenotypeError(f"active mask of length {len(mask)} does not fit genotype of length {len(child_genotype)}")
    if any(mask[i] for i in changed):
        return None
    return replace(parent_result, skipped=True)


def reference_madds(supernet: Supernetwork) -> Dict[str, int]:
    """Per-sample cost of parent A, parent B and the full ensemble."""
    costs = {}
    for name, choice in (("parent_a", 0), ("parent_b", 1), ("ensemble", 2)):
        graph, _ = decode(supernet, reference_genotype(supernet.genotype_length, choice))
        costs[name] = network_madds(graph)
    return costs
