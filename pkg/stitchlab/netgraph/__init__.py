"""Computation graphs: construction, execution, cost, pruning and containers."""

from .container import (
    NetworkDocument,
    decode_array,
    document_to_graph,
    encode_array,
    graph_to_document,
    load_network,
    read_document,
    save_network,
    write_document,
)
from .graph import (
    ActivationRecord,
    EquivalenceReport,
    GraphBuilder,
    GraphNode,
    NetworkGraph,
    TaskSignature,
    backward,
    forward,
    infer_shapes,
    live_nodes,
    network_madds,
    prune_dead,
    topological_order,
    verify_equivalence,
)

__all__ = [
    "ActivationRecord",
    "EquivalenceReport",
    "GraphBuilder",
    "GraphNode",
    "NetworkDocument",
    "NetworkGraph",
    "TaskSignature",
    "backward",
    "decode_array",
    "document_to_graph",
    "encode_array",
    "forward",
    "graph_to_document",
    "infer_shapes",
    "live_nodes",
    "load_network",
    "network_madds",
    "prune_dead",
    "read_document",
    "save_network",
    "topological_order",
    "verify_equivalence",
    "write_document",
]
