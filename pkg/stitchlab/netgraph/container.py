"""
Network container files.

A container is one JSON document described by pydantic models. Weight tensors
are stored as base64 of little-endian float32 bytes in row-major order, so a
save, load, save cycle reproduces the file byte for byte.
"""

import base64
import binascii
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from ..errors import CycleError, FormatError, FormatVersionError, GraphError, ShapeMismatchError
from ..tensorcore import LayerKind, LayerSpec
from .graph import GraphNode, NetworkGraph, TaskSignature

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

PathLike = Union[str, Path]
DocumentT = TypeVar("DocumentT", bound=BaseModel)


class WeightBlob(BaseModel):
    shape: List[int]
    data: str


class NodeRecord(BaseModel):
    id: str
    kind: str
    hyperparams: Dict[str, Any] = {}
    inputs: List[str] = []


class TaskRecord(BaseModel):
    input_shape: List[int]
    num_classes: int


class NetworkDocument(BaseModel):
    """Serialized form of a :class:`NetworkGraph`."""

    model_config = ConfigDict(extra="forbid")

    format_version: int = FORMAT_VERSION
    name: str
    task: TaskRecord
    nodes: List[NodeRecord]
    input: str
    output: str
    weights: Dict[str, List[WeightBlob]] = {}
    metadata: Dict[str, str] = {}


# Arrays -----------------------------------------------------------------

def encode_array(array: np.ndarray, dtype: str = "<f4") -> WeightBlob:
    raw = np.ascontiguousarray(array, dtype=dtype).tobytes()
    return WeightBlob(shape=list(array.shape), data=base64.b64encode(raw).decode("ascii"))


def decode_array(blob: WeightBlob, context: str, dtype: str = "<f4") -> np.ndarray:
    try:
        raw = base64.b64decode(blob.data, validate=True)
    except (binascii.Error, ValueError) as e:
        raise FormatError(f"{context}: corrupt base64 data ({e})") from None
    expected = int(np.prod(blob.shape, dtype=np.int64)) * np.dtype(dtype).itemsize
    if len(raw) != expected:
        raise FormatError(f"{context}: {len(raw)} bytes of data for shape {blob.shape}")
    array = np.frombuffer(raw, dtype=dtype).reshape(blob.shape)
    return array.astype(np.dtype(dtype).newbyteorder("="))


# Documents --------------------------------------------------------------

def write_document(document: BaseModel, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document.model_dump_json(indent=1) + "\n", encoding="utf-8")
    return path


def read_document(path: PathLike, model: Type[DocumentT]) -> DocumentT:
    """Parse ``path`` into ``model``, checking the format version first.

    Raises:
        FormatError: with line/column or field context
        FormatVersionError: for any version other than the supported one
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: top-level value must be an object")
    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionError(f"{path}: unsupported format_version {version!r}, expected {FORMAT_VERSION}")
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(p) for p in first["loc"])
        raise FormatError(f"{path}: field '{location}': {first['msg']}") from None


# Graphs -----------------------------------------------------------------

def graph_to_document(graph: NetworkGraph) -> NetworkDocument:
    nodes = []
    weights = {}
    for node_id, node in graph.nodes.items():
        nodes.append(NodeRecord(id=node_id, kind=node.spec.kind.value,
                                hyperparams=node.spec.hyperparams(), inputs=list(node.inputs)))
        if node.weights:
            weights[node_id] = [encode_array(w) for w in node.weights]
    return NetworkDocument(
        name=graph.name,
        task=TaskRecord(input_shape=list(graph.task.input_shape), num_classes=graph.task.num_classes),
        nodes=nodes,
        input=graph.input_node,
        output=graph.output_node,
        weights=weights,
        metadata=dict(graph.metadata),
    )


def _spec_from_record(record: NodeRecord) -> LayerSpec:
    try:
        kind = LayerKind(record.kind)
    except ValueError:
        raise FormatError(f"node '{record.id}': unknown kind '{record.kind}'") from None
    try:
        return LayerSpec(kind=kind, **record.hyperparams)
    except (ValidationError, TypeError) as e:
        raise FormatError(f"node '{record.id}': invalid hyperparameters ({e})") from None


def document_to_graph(document: NetworkDocument) -> NetworkGraph:
    nodes = {}
    for record in document.nodes:
        if record.id in nodes:
            raise FormatError(f"node '{record.id}': duplicate id")
        spec = _spec_from_record(record)
        blobs = document.weights.get(record.id, [])
        weights = tuple(
            decode_array(blob, f"node '{record.id}' weight {i}") for i, blob in enumerate(blobs)
        )
        nodes[record.id] = GraphNode(record.id, spec, tuple(record.inputs), weights)
    extra = set(document.weights) - set(nodes)
    if extra:
        raise FormatError(f"weights given for unknown nodes {sorted(extra)}")
    try:
        task = TaskSignature(tuple(document.task.input_shape), document.task.num_classes)
        graph = NetworkGraph(document.name, task, nodes, document.input, document.output, document.metadata)
        graph.shapes  # shape propagation doubles as a structural check
    except (CycleError, GraphError, ShapeMismatchError) as e:
        raise FormatError(f"invalid network '{document.name}': {e}") from e
    return graph


def save_network(graph: NetworkGraph, path: PathLike) -> Path:
    """Write ``graph`` to a network container file."""
    path = write_document(graph_to_document(graph), path)
    logger.info(f"[CONTAINER] Saved network '{graph.name}' ({len(graph)} nodes) to {path}")
    return path


def load_network(path: PathLike) -> NetworkGraph:
    """Read a network container file written by :func:`save_network`."""
    try:
        graph = document_to_graph(read_document(path, NetworkDocument))
    except FormatError as e:
        if str(path) in str(e):
            raise
        raise type(e)(f"{path}: {e}") from None
    logger.debug(f"[CONTAINER] Loaded network '{graph.name}' from {path}")
    return graph
