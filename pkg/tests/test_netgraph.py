"""Computation graphs and their container files."""

import json

import numpy as np
import pytest

from stitchlab.errors import CycleError, FormatError, GraphError, ShapeMismatchError
from stitchlab.netgraph import (
    GraphBuilder,
    GraphNode,
    NetworkGraph,
    TaskSignature,
    backward,
    forward,
    live_nodes,
    load_network,
    network_madds,
    prune_dead,
    save_network,
    topological_order,
    verify_equivalence,
)
from stitchlab.tensorcore import LayerSpec


def test_order_respects_edges(tiny_mlp):
    order = topological_order(tiny_mlp)
    assert order == ["input", "fc1", "relu1", "logits"]
    assert tiny_mlp.shapes["logits"] == (1, 2)


def test_cycle_is_reported_with_its_nodes():
    nodes = {
        "input": GraphNode("input", LayerSpec.input()),
        "x": GraphNode("x", LayerSpec.relu(), ("y",)),
        "y": GraphNode("y", LayerSpec.relu(), ("x",)),
    }
    graph = NetworkGraph("loop", TaskSignature((2,), 2), nodes, "input", "y")
    with pytest.raises(CycleError) as info:
        topological_order(graph)
    assert set(info.value.cycle) == {"x", "y"}


def test_unknown_input_is_rejected():
    nodes = {
        "input": GraphNode("input", LayerSpec.input()),
        "out": GraphNode("out", LayerSpec.relu(), ("missing",)),
    }
    with pytest.raises(GraphError, match="unknown node 'missing'"):
        NetworkGraph("broken", TaskSignature((2,), 2), nodes, "input", "out")


def test_weights_are_read_only(tiny_mlp):
    with pytest.raises(ValueError):
        tiny_mlp.node("fc1").weights[0][0, 0] = 1.0


def test_forward_checks_batch_shape(tiny_mlp):
    with pytest.raises(ShapeMismatchError):
        forward(tiny_mlp, np.zeros((3, 5), np.float32))
    assert forward(tiny_mlp, np.zeros((3, 2), np.float32)).shape == (3, 2)


def test_network_madds_sums_parameterised_layers(tiny_mlp):
    assert network_madds(tiny_mlp) == 2 * 4 + 4 * 2


def test_prune_dead_drops_unreachable_nodes():
    b = GraphBuilder("dead_end", TaskSignature((2,), 2))
    h = b.add("fc1", LayerSpec.linear(2, 4), [b.input_id])
    b.add("unused", LayerSpec.linear(4, 3), [h])
    b.set_output(b.add("logits", LayerSpec.linear(4, 2), [h]))
    graph = b.build(np.random.default_rng(0))

    pruned = prune_dead(graph)
    assert "unused" not in pruned
    assert network_madds(pruned) == network_madds(graph) - 4 * 3
    x = np.random.default_rng(1).normal(size=(5, 2)).astype(np.float32)
    np.testing.assert_array_equal(forward(pruned, x), forward(graph, x))


def test_live_nodes_follow_selected_switch_input():
    b = GraphBuilder("switched", TaskSignature((2,), 2))
    left = b.add("left", LayerSpec.linear(2, 2), [b.input_id])
    right = b.add("right", LayerSpec.linear(2, 2), [b.input_id])
    b.set_output(b.add("pick", LayerSpec.switch(2), [left, right]))
    graph = b.build(np.random.default_rng(0))
    assert live_nodes(graph) == {"pick", "left", "input"}
    assert live_nodes(graph, {"pick": 1}) == {"pick", "right", "input"}


def test_container_round_trip_is_bit_exact(tmp_path, tiny_mlp):
    first = save_network(tiny_mlp, tmp_path / "a.net")
    loaded = load_network(first)
    second = save_network(loaded, tmp_path / "b.net")
    assert first.read_bytes() == second.read_bytes()
    x = np.random.default_rng(2).normal(size=(8, 2)).astype(np.float32)
    report = verify_equivalence(loaded, [(x, forward(tiny_mlp, x))], tol=0.0)
    assert report.passed


def test_corrupt_container_raises_format_error(tmp_path):
    path = tmp_path / "bad.net"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(FormatError):
        load_network(path)


def test_verify_equivalence_fails_when_a_later_pair_is_nan(tiny_mlp):
    x = np.random.default_rng(3).normal(size=(4, 2)).astype(np.float32)
    good = forward(tiny_mlp, x)
    poisoned = np.full_like(good, np.nan)
    report = verify_equivalence(tiny_mlp, [(x, good), (x, poisoned)], tol=1e-5)
    assert not report.passed
    assert report.per_pair[0] == 0.0


def test_verify_equivalence_fails_after_a_weight_is_perturbed(tiny_mlp):
    x = np.random.default_rng(4).normal(size=(16, 2)).astype(np.float32)
    pairs = [(x, forward(tiny_mlp, x))]
    assert verify_equivalence(tiny_mlp, pairs).passed

    kernel, bias = (np.array(w) for w in tiny_mlp.nodes["logits"].weights)
    kernel[0, 0] += 0.5
    nudged = tiny_mlp.with_weights({"logits": [kernel, bias]})
    report = verify_equivalence(nudged, pairs)
    assert not report.passed
    assert report.max_abs_diff > 1e-3


def test_prune_dead_keeps_outputs_on_random_batches():
    b = GraphBuilder("branchy", TaskSignature((3,), 2))
    h = b.add("fc1", LayerSpec.linear(3, 5), [b.input_id])
    h = b.add("relu1", LayerSpec.relu(), [h])
    side = b.add("side", LayerSpec.linear(5, 5), [h])
    b.add("side_out", LayerSpec.linear(5, 2), [side])
    b.set_output(b.add("logits", LayerSpec.linear(5, 2), [h]))
    graph = b.build(np.random.default_rng(5))
    pruned = prune_dead(graph)
    assert set(pruned.nodes) == {"input", "fc1", "relu1", "logits"}

    rng = np.random.default_rng(6)
    for size in (1, 7, 32):
        x = rng.normal(scale=3.0, size=(size, 3)).astype(np.float32)
        np.testing.assert_array_equal(forward(pruned, x), forward(graph, x))


def test_unknown_layer_kind_raises_format_error(tmp_path, tiny_mlp):
    path = save_network(tiny_mlp, tmp_path / "net.net")
    document = json.loads(path.read_text(encoding="utf-8"))
    for record in document["nodes"]:
        if record["id"] == "relu1":
            record["kind"] = "Teleport"
    path.write_text(json.dumps(document), encoding="utf-8")
    with pytest.raises(FormatError, match="unknown kind 'Teleport'"):
        load_network(path)


def test_graph_backward_matches_finite_differences():
    b = GraphBuilder("residual", TaskSignature((1, 6, 6), 3))
    c1 = b.add("c1", LayerSpec.conv2d(1, 2, kernel=3, padding=1), [b.input_id])
    c2 = b.add("c2", LayerSpec.conv2d(2, 2, kernel=3, padding=1), [c1])
    h = b.add("sum", LayerSpec.add(2), [c1, c2])
    h = b.add("pool", LayerSpec.global_avg_pool(), [h])
    b.set_output(b.add("logits", LayerSpec.linear(2, 3), [h]))
    graph = b.build(np.random.default_rng(7))

    rng = np.random.default_rng(8)
    x = rng.normal(size=(2, 1, 6, 6)).astype(np.float32)
    upstream = rng.normal(size=(2, 3)).astype(np.float32)
    grads = backward(graph, x, upstream)
    assert set(grads) == {"c1", "c2", "logits"}

    def loss(candidate):
        return float(np.sum(forward(candidate, x).astype(np.float64) * upstream))

    eps = 1e-2
    for node_id in ("c1", "c2", "logits"):
        weights = [np.array(w) for w in graph.nodes[node_id].weights]
        for k, w in enumerate(weights):
            numeric = np.zeros(w.shape)
            for idx in np.ndindex(w.shape):
                plus = [v.copy() for v in weights]
                minus = [v.copy() for v in weights]
                plus[k][idx] += eps
                minus[k][idx] -= eps
                numeric[idx] = (loss(graph.with_weights({node_id: plus}))
                                - loss(graph.with_weights({node_id: minus}))) / (2 * eps)
            np.testing.assert_allclose(grads[node_id][k], numeric, rtol=1e-2, atol=1e-3,
                                       err_msg=f"{node_id}[{k}]")
