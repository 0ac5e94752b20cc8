"""
Supernetwork construction and its container file.

Node ids in the merged graph:

* ``input``: the shared input of both parents
* ``A/<id>``, ``B/<id>``: parent layers
* ``stitch/A/<a>``: stitch from B's matched layer into A's layer ``a``
* ``switch/A/<a>``: switch with inputs ``[A/<a>, stitch/A/<a>]``
* ``ensemble``: mean of both parents' logits
* ``switch/output``: output switch with inputs ``[A out, B out, ensemble]``

The switch registry lists, per match in plan order, the A-side switch then the
B-side switch, and finally the output switch.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from ..errors import CycleError, FormatError, GenotypeError
from ..netgraph import GraphNode, NetworkGraph, read_document, write_document
from ..netgraph.container import NetworkDocument, document_to_graph, graph_to_document
from ..tensorcore import LayerSpec, init_weights, madds_of_layer
from .matching import PREFIX_A, PREFIX_B, MatchCandidate, MatchingPlan, StitchKind

logger = logging.getLogger(__name__)

INPUT_ID = "input"
ENSEMBLE_ID = "ensemble"
OUTPUT_SWITCH_ID = "switch/output"


@dataclass(frozen=True)
class SwitchEntry:
    id: str
    inputs: Tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.inputs)


@dataclass(frozen=True, eq=False)
class Supernetwork:
    """Merged graph, ordered switch registry and provenance."""

    graph: NetworkGraph
    switches: Tuple[SwitchEntry, ...]
    plan: MatchingPlan
    parent_names: Tuple[str, str]
    parent_outputs: Tuple[str, str]

    @property
    def genotype_length(self) -> int:
        return len(self.switches)

    @property
    def output_switch(self) -> SwitchEntry:
        return self.switches[-1]

    @property
    def stitch_ids(self) -> List[str]:
        return [node_id for node_id in self.graph.nodes if node_id.startswith("stitch/")]

    def alphabet_sizes(self) -> np.ndarray:
        return np.array([s.arity for s in self.switches], dtype=np.int64)

    def check_genotype(self, genotype: Sequence[int]) -> np.ndarray:
        g = np.asarray(genotype, dtype=np.int64)
        if g.ndim != 1 or g.shape[0] != self.genotype_length:
            raise GenotypeError(
                f"genotype of length {g.size} does not fit a supernetwork with {self.genotype_length} switches"
            )
        sizes = self.alphabet_sizes()
        bad = np.flatnonzero((g < 0) | (g >= sizes))
        if bad.size:
            i = int(bad[0])
            raise GenotypeError(f"gene {i} = {int(g[i])} outside [0, {int(sizes[i])}) for {self.switches[i].id}")
        return g

    def selections(self, genotype: Sequence[int]) -> Dict[str, int]:
        g = self.check_genotype(genotype)
        return {s.id: int(v) for s, v in zip(self.switches, g)}

    def stitch_donor(self, stitch_id: str) -> str:
        return self.graph.nodes[stitch_id].inputs[0]

    def stitch_target(self, stitch_id: str) -> str:
        return stitch_id[len("stitch/"):]

    def stitch_madds(self) -> int:
        shapes = self.graph.shapes
        return sum(
            madds_of_layer(self.graph.nodes[s].spec, [shapes[self.stitch_donor(s)]]) for s in self.stitch_ids
        )

    def with_stitch_weights(self, updates: Mapping[str, Sequence[np.ndarray]]) -> "Supernetwork":
        foreign = [k for k in updates if not k.startswith("stitch/")]
        if foreign:
            raise GenotypeError(f"only stitch weights may change, got {foreign}")
        return Supernetwork(self.graph.with_weights(updates), self.switches, self.plan,
                            self.parent_names, self.parent_outputs)


def _stitch_spec(match: MatchCandidate, into_a: bool) -> LayerSpec:
    n_in, n_out = (match.features_b, match.features_a) if into_a else (match.features_a, match.features_b)
    if match.stitch_kind == StitchKind.LINEAR:
        return LayerSpec.linear(n_in, n_out)
    return LayerSpec.conv2d(n_in, n_out, 1)


def build_supernetwork(parent_a: NetworkGraph, parent_b: NetworkGraph, plan: MatchingPlan,
                       seed: int = 0) -> Supernetwork:
    """Merge two parents with one stitch and one switch per matched layer and direction."""
    rng = np.random.default_rng(seed)
    rewire: Dict[str, str] = {}
    for match in plan:
        rewire[PREFIX_A + match.node_a] = f"switch/{PREFIX_A}{match.node_a}"
        rewire[PREFIX_B + match.node_b] = f"switch/{PREFIX_B}{match.node_b}"

    nodes: Dict[str, GraphNode] = {INPUT_ID: GraphNode(INPUT_ID, LayerSpec.input())}
    for prefix, parent in ((PREFIX_A, parent_a), (PREFIX_B, parent_b)):
        for node_id, node in parent.nodes.items():
            if node_id == parent.input_node:
                continue
            inputs = []
            for src in node.inputs:
                merged = INPUT_ID if src == parent.input_node else prefix + src
                inputs.append(rewire.get(merged, merged))
            nodes[prefix + node_id] = GraphNode(prefix + node_id, node.spec, tuple(inputs), node.weights)

    switches: List[SwitchEntry] = []
    for match in plan:
        a, b = PREFIX_A + match.node_a, PREFIX_B + match.node_b
        for target, donor, into_a in ((a, b, True), (b, a, False)):
            spec = _stitch_spec(match, into_a)
            stitch_id, switch_id = f"stitch/{target}", f"switch/{target}"
            nodes[stitch_id] = GraphNode(stitch_id, spec, (donor,), tuple(init_weights(spec, rng, gain=1.0)))
            nodes[switch_id] = GraphNode(switch_id, LayerSpec.switch(2), (target, stitch_id))
            switches.append(SwitchEntry(switch_id, (target, stitch_id)))

    out_a, out_b = PREFIX_A + parent_a.output_node, PREFIX_B + parent_b.output_node
    nodes[ENSEMBLE_ID] = GraphNode(ENSEMBLE_ID, LayerSpec.mean(2), (out_a, out_b))
    output_inputs = (out_a, out_b, ENSEMBLE_ID)
    nodes[OUTPUT_SWITCH_ID] = GraphNode(OUTPUT_SWITCH_ID, LayerSpec.switch(3), output_inputs)
    switches.append(SwitchEntry(OUTPUT_SWITCH_ID, output_inputs))

    graph = NetworkGraph(
        name=f"{parent_a.name}+{parent_b.name}",
        task=parent_a.task,
        nodes=nodes,
        input_node=INPUT_ID,
        output_node=OUTPUT_SWITCH_ID,
        metadata={"parent_a": parent_a.name, "parent_b": parent_b.name},
    )
    try:
        graph.shapes
    except CycleError:
        logger.error(f"[SUPERNET] Plan of {len(plan)} match(es) produced a cycle", exc_info=True)
        raise

    supernet = Supernetwork(graph, tuple(switches), plan, (parent_a.name, parent_b.name), (out_a, out_b))
    logger.info(
        f"[SUPERNET] Built {graph.name}: {len(plan)} match(es), {len(graph)} nodes, "
        f"genotype length {supernet.genotype_length}"
    )
    return supernet


def extract_parent(supernet: Supernetwork, side: str) -> NetworkGraph:
    """Rebuild parent ``A`` or ``B`` from the merged graph (switches bypassed)."""
    prefix = {"A": PREFIX_A, "B": PREFIX_B}[side]
    nodes: Dict[str, GraphNode] = {INPUT_ID: GraphNode(INPUT_ID, LayerSpec.input())}
    for node_id, node in supernet.graph.nodes.items():
        if not node_id.startswith(prefix):
            continue
        inputs = tuple(
            src[len("switch/") + len(prefix):] if src.startswith("switch/") else
            (INPUT_ID if src == INPUT_ID else src[len(prefix):])
            for src in node.inputs
        )
        local = node_id[len(prefix):]
        nodes[local] = GraphNode(local, node.spec, inputs, node.weights)
    output = supernet.parent_outputs[0 if side == "A" else 1][len(prefix):]
    name = supernet.parent_names[0 if side == "A" else 1]
    return NetworkGraph(name, supernet.graph.task, nodes, INPUT_ID, output)


# Container --------------------------------------------------------------

class MatchRecord(BaseModel):
    node_a: str
    node_b: str
    kind: StitchKind
    features_a: int
    features_b: int
    spatial: Optional[List[int]] = None


class SwitchRecord(BaseModel):
    id: str
    inputs: List[str]


class SupernetDocument(NetworkDocument):
    parents: List[str]
    parent_outputs: List[str]
    matches: List[MatchRecord]
    switches: List[SwitchRecord]
    genotype_order: List[str]
    timed_out: bool = False


def save_supernetwork(supernet: Supernetwork, path: Union[str, Path]) -> Path:
    base = graph_to_document(supernet.graph)
    document = SupernetDocument(
        **base.model_dump(),
        parents=list(supernet.parent_names),
        parent_outputs=list(supernet.parent_outputs),
        matches=[
            MatchRecord(node_a=m.node_a, node_b=m.node_b, kind=m.stitch_kind, features_a=m.features_a,
                        features_b=m.features_b, spatial=list(m.spatial) if m.spatial else None)
            for m in supernet.plan
        ],
        switches=[SwitchRecord(id=s.id, inputs=list(s.inputs)) for s in supernet.switches],
        genotype_order=[s.id for s in supernet.switches],
        timed_out=supernet.plan.timed_out,
    )
    path = write_document(document, path)
    logger.info(f"[SUPERNET] Saved {supernet.graph.name} to {path}")
    return path


def load_supernetwork(path: Union[str, Path]) -> Supernetwork:
    document = read_document(path, SupernetDocument)
    graph = document_to_graph(NetworkDocument(**document.model_dump(include=set(NetworkDocument.model_fields))))
    if [s.id for s in document.switches] != document.genotype_order:
        raise FormatError(f"{path}: genotype_order does not match the switch list")
    for record in document.switches:
        node = graph.nodes.get(record.id)
        if node is None or tuple(node.inputs) != tuple(record.inputs):
            raise FormatError(f"{path}: switch '{record.id}' does not match the graph")
    plan = MatchingPlan(
        tuple(
            MatchCandidate(m.node_a, m.node_b, m.kind, m.features_a, m.features_b,
                           tuple(m.spatial) if m.spatial else None)
            for m in document.matches
        ),
        timed_out=document.timed_out,
    )
    if plan.genotype_length != len(document.switches):
        raise FormatError(f"{path}: {len(plan)} matches but {len(document.switches)} switches")
    return Supernetwork(
        graph,
        tuple(SwitchEntry(s.id, tuple(s.inputs)) for s in document.switches),
        plan,
        tuple(document.parents),
        tuple(document.parent_outputs),
    )

