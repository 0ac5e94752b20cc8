"""Candidate matching, supernetwork construction and stitch training."""

import itertools

import numpy as np
import pytest

from stitchlab.config import StitchTrainConfig
from stitchlab.errors import MatchingTimeoutError, SingularSystemError
from stitchlab.netgraph import GraphBuilder, TaskSignature, forward, network_madds
from stitchlab.stitcher import (
    MatchCandidate,
    MatchingPlan,
    MergeDependencies,
    StitchKind,
    acyclic_max_matching,
    build_supernetwork,
    extract_parent,
    find_candidates,
    load_supernetwork,
    save_supernetwork,
    solve_stitch_least_squares,
    train_stitches,
    would_create_cycle,
)
from stitchlab.phenotype import decode, reference_genotype
from stitchlab.synthdata import build_parent_pair, generate_dataset
from stitchlab.tensorcore import LayerKind, LayerSpec


def test_candidates_pair_every_eligible_layer(mlp_parents):
    parent_a, parent_b = mlp_parents
    candidates = find_candidates(parent_a, parent_b)
    # A: fc1, relu1, fc2, relu2; B: fc1, relu1; outputs never match
    assert len(candidates) == 8
    assert all(c.stitch_kind == StitchKind.LINEAR for c in candidates)
    assert not any("logits" in (c.node_a, c.node_b) for c in candidates)
    assert len(find_candidates(parent_a, parent_b, stride=2)) == 2


def test_crossing_matches_are_cyclic(mlp_parents):
    parent_a, parent_b = mlp_parents
    late_early = MatchCandidate("fc2", "fc1", StitchKind.LINEAR, 32, 64)
    early_late = MatchCandidate("fc1", "relu1", StitchKind.LINEAR, 32, 64)
    assert would_create_cycle(parent_a, parent_b, [late_early], early_late)
    assert not would_create_cycle(parent_a, parent_b, [], early_late)


def test_matching_is_maximal_and_acyclic(mlp_parents):
    parent_a, parent_b = mlp_parents
    plan = acyclic_max_matching(parent_a, parent_b, find_candidates(parent_a, parent_b))
    assert len(plan) == 2 and not plan.timed_out
    assert len({m.node_a for m in plan}) == 2 and len({m.node_b for m in plan}) == 2
    supernet = build_supernetwork(parent_a, parent_b, plan)
    assert supernet.genotype_length == 2 * len(plan) + 1
    assert supernet.graph.order[0] == "input"


def test_matching_budget(mlp_parents):
    parent_a, parent_b = mlp_parents
    candidates = find_candidates(parent_a, parent_b)
    plan = acyclic_max_matching(parent_a, parent_b, candidates, max_expansions=1)
    assert plan.timed_out and len(plan) >= 1
    with pytest.raises(MatchingTimeoutError) as info:
        acyclic_max_matching(parent_a, parent_b, candidates, max_expansions=1, strict=True)
    assert info.value.best_plan is not None


@pytest.mark.parametrize("side,index", [("A", 0), ("B", 1)])
def test_extracted_parent_is_bit_exact(spirals, trained_parents, supernet, side, index):
    parent = trained_parents[index]
    extracted = extract_parent(supernet, side)
    samples, _ = spirals.split("test")
    np.testing.assert_array_equal(forward(extracted, samples), forward(parent, samples))
    assert network_madds(extracted) == network_madds(parent)


def test_supernetwork_container_round_trip(tmp_path, supernet):
    first = save_supernetwork(supernet, tmp_path / "stitched.supernet")
    loaded = load_supernetwork(first)
    second = save_supernetwork(loaded, tmp_path / "again.supernet")
    assert first.read_bytes() == second.read_bytes()
    assert [s.id for s in loaded.switches] == [s.id for s in supernet.switches]


def test_least_squares_recovers_an_affine_map(rng):
    x = rng.normal(size=(64, 3))
    weight = rng.normal(size=(3, 2))
    bias = np.array([0.5, -2.0])
    w, b = solve_stitch_least_squares(x.astype(np.float32), (x @ weight + bias).astype(np.float32), ridge=0.0)
    np.testing.assert_allclose(w, weight, atol=1e-3)
    np.testing.assert_allclose(b, bias, atol=1e-3)


def test_rank_deficient_activations_need_a_ridge(rng):
    col = rng.normal(size=(32, 1))
    x = np.hstack([col, col]).astype(np.float32)
    y = rng.normal(size=(32, 2)).astype(np.float32)
    with pytest.raises(SingularSystemError):
        solve_stitch_least_squares(x, y, ridge=0.0)
    w, _ = solve_stitch_least_squares(x, y, ridge=1e-3)
    assert np.all(np.isfinite(w))


def test_training_touches_only_stitches(spirals, supernet, trained_supernet):
    for node_id, node in supernet.graph.nodes.items():
        if node_id.startswith("stitch/"):
            continue
        for before, after in zip(node.weights, trained_supernet.graph.nodes[node_id].weights):
            np.testing.assert_array_equal(before, after)


def test_closed_form_is_no_worse_than_adam(spirals, supernet):
    _, exact = train_stitches(supernet, spirals, StitchTrainConfig(method="closed_form"))
    _, adam = train_stitches(supernet, spirals, StitchTrainConfig(method="adam", sample_budget=3200, lr=1e-2))
    assert len(exact.stitches) == len(supernet.stitch_ids) == 4
    for s in exact.stitches:
        assert s.mse <= s.initial_mse
        assert s.mse <= adam.by_id()[s.stitch_id].mse * (1 + 1e-4) + 1e-7


def _random_parent(name, rng, depth, residual):
    width = int(rng.integers(2, 6))
    b = GraphBuilder(name, TaskSignature((2,), 2))
    h = b.add("h1", LayerSpec.linear(2, width), [b.input_id])
    first = h
    for i in range(2, depth + 1):
        h = b.add(f"h{i}", LayerSpec.linear(width, width), [h])
    if residual and depth >= 2:
        h = b.add("sum", LayerSpec.add(2), [first, h])
    b.set_output(b.add("logits", LayerSpec.linear(width, 2), [h]))
    return b.build(rng)


def _exhaustive_max_matching(parent_a, parent_b, candidates):
    for size in range(len(candidates), 0, -1):
        for subset in itertools.combinations(candidates, size):
            if len({c.node_a for c in subset}) < size or len({c.node_b for c in subset}) < size:
                continue
            deps = MergeDependencies(parent_a, parent_b)
            for match in subset:
                if deps.would_cycle(match):
                    break
                deps.add(match)
            else:
                return size
    return 0


def test_branch_and_bound_equals_exhaustive_search():
    rng = np.random.default_rng(7)
    for trial in range(50):
        depth_a = int(rng.integers(1, 4))
        residual = bool(rng.integers(0, 2))
        eligible_a = depth_a + (residual and depth_a >= 2)
        depth_b = int(rng.integers(1, max(1, 10 // eligible_a) + 1))
        depth_b = min(depth_b, 4)
        parent_a = _random_parent(f"a{trial}", rng, depth_a, residual)
        parent_b = _random_parent(f"b{trial}", rng, depth_b, False)
        candidates = find_candidates(parent_a, parent_b)
        assert len(candidates) <= 10
        plan = acyclic_max_matching(parent_a, parent_b, candidates)
        assert len(plan) == _exhaustive_max_matching(parent_a, parent_b, candidates), trial


@pytest.mark.parametrize("matches,length", [(154, 309), (206, 413), (56, 113)])
def test_genotype_length_formula(matches, length):
    dummy = MatchCandidate("a", "b", StitchKind.LINEAR, 1, 1)
    assert MatchingPlan((dummy,) * matches).genotype_length == length


def test_self_stitching_is_exact(spirals, mlp_parents):
    parent = mlp_parents[0]
    aligned = [c for c in find_candidates(parent, parent) if c.node_a == c.node_b]
    plan = acyclic_max_matching(parent, parent, aligned)
    assert len(plan) == len(aligned) == 4
    _, report = train_stitches(build_supernetwork(parent, parent, plan, seed=0), spirals,
                               StitchTrainConfig(method="closed_form"))
    assert all(s.mse <= 1e-8 for s in report.stitches)


@pytest.mark.parametrize("method", ["closed_form", "adam"])
def test_stitches_train_the_same_jointly_or_alone(spirals, supernet, method):
    parent_a, parent_b = (extract_parent(supernet, side) for side in ("A", "B"))
    cfg = StitchTrainConfig(method=method, sample_budget=640, lr=1e-2)
    joint, joint_report = train_stitches(supernet, spirals, cfg)
    for match in supernet.plan:
        alone_net = build_supernetwork(parent_a, parent_b, MatchingPlan((match,)), seed=0)
        alone_net = alone_net.with_stitch_weights(
            {s: supernet.graph.nodes[s].weights for s in alone_net.stitch_ids}
        )
        alone, alone_report = train_stitches(alone_net, spirals, cfg)
        assert len(alone.stitch_ids) == 2
        for stitch_id in alone.stitch_ids:
            assert alone_report.by_id()[stitch_id].mse == pytest.approx(
                joint_report.by_id()[stitch_id].mse, abs=1e-6)
            for w_alone, w_joint in zip(alone.graph.nodes[stitch_id].weights,
                                        joint.graph.nodes[stitch_id].weights):
                np.testing.assert_allclose(w_alone, w_joint, atol=1e-6)


def test_image_parents_stitch_with_1x1_convolutions():
    dataset = generate_dataset("images", seed=0, n=100)
    parent_a, parent_b = build_parent_pair("deep_vs_shallow", dataset.task, seed=0)
    candidates = find_candidates(parent_a, parent_b)
    spatial = [c for c in candidates if c.stitch_kind == StitchKind.CONV1X1]
    assert spatial and all(c.spatial is not None for c in spatial)
    assert any(c.stitch_kind == StitchKind.LINEAR for c in candidates)

    plan = acyclic_max_matching(parent_a, parent_b, spatial, max_expansions=20000)
    assert len(plan) > 0
    supernet = build_supernetwork(parent_a, parent_b, plan, seed=0)
    for stitch_id in supernet.stitch_ids:
        spec = supernet.graph.nodes[stitch_id].spec
        assert spec.kind == LayerKind.CONV2D and spec.kernel_size == (1, 1)

    trained, report = train_stitches(supernet, dataset, StitchTrainConfig(method="closed_form", max_samples=32))
    assert all(s.mse <= s.initial_mse for s in report.stitches)
    samples, _ = dataset.split("validation")
    for choice, parent in enumerate((parent_a, parent_b)):
        graph, _ = decode(trained, reference_genotype(trained.genotype_length, choice))
        np.testing.assert_array_equal(forward(graph, samples), forward(parent, samples))
