"""Scalarization, archive, hypervolume, variation, linkage and statistics."""

import numpy as np
import pytest
from scipy.stats import mannwhitneyu

from stitchlab.errors import InsufficientSamplesError
from stitchlab.search import (
    Archive,
    ArchiveEntry,
    ObjectivePoint,
    SteeringSchedule,
    assign_weights,
    build_linkage_tree,
    constrained_better,
    ga_generate,
    ga_replace,
    holm_bonferroni,
    hypervolume_2d,
    knn_neighborhood,
    mann_whitney,
    mann_whitney_holm,
    mutual_information_matrix,
    nondominated,
    sample_kernel_size,
    tschebysheff,
    uniform_mutation,
    weight_grid,
)

EPS = 1e-6


def point(f1, f2):
    return ObjectivePoint(accuracy=1.0 - f1, madds=int(round(f2 * 1000)), f1=f1, f2=f2)


# Scalarization ----------------------------------------------------------

def test_tschebysheff():
    assert tschebysheff(point(0.2, 0.6), (0.5, 0.5)) == pytest.approx(0.3)
    assert tschebysheff(point(0.0, 0.0), (0.9, 0.1)) == 0.0
    assert tschebysheff(point(0.2, 0.6), (1.0, 1.0)) == pytest.approx(2 * 0.3)


def test_feasibility_comes_first():
    a = ObjectivePoint.from_result(0.6, 9000, 1000)
    b = ObjectivePoint.from_result(0.4, 10, 1000)
    assert constrained_better(a, b, 0.5, (0.5, 0.5))
    assert not constrained_better(b, a, 0.5, (0.5, 0.5))


def test_infeasible_pair_compares_accuracy():
    a = ObjectivePoint.from_result(0.3, 900, 1000)
    b = ObjectivePoint.from_result(0.2, 10, 1000)
    assert constrained_better(a, b, 0.5, (EPS, 1 - EPS))


def test_zero_threshold_is_pure_scalarization():
    a, b = point(0.1, 0.5), point(0.3, 0.2)
    w = (0.5, 0.5)
    assert constrained_better(b, a, 0.0, w) == (tschebysheff(b, w) < tschebysheff(a, w))
    assert not constrained_better(a, a, 0.0, w)


def test_steering_schedule():
    schedule = SteeringSchedule(budget=200)
    assert [schedule.threshold(e) for e in (0, 50, 100, 150)] == [0.0, 0.25, 0.5, 0.5]


def test_weight_grid_spans_both_extremes():
    grid = weight_grid(5)
    assert grid.shape == (5, 2)
    np.testing.assert_allclose(grid.sum(axis=1), 1.0)
    assert grid[0, 0] == pytest.approx(EPS) and grid[-1, 0] == pytest.approx(1 - EPS)
    np.testing.assert_allclose(weight_grid(1), [[0.5, 0.5]])


@pytest.mark.parametrize("seed", range(4))
def test_extremes_get_their_nearer_weight(seed):
    weights = np.array([[EPS, 1 - EPS], [1 - EPS, EPS]])
    assignment = assign_weights([point(0.0, 1.0), point(1.0, 0.0)], weights, np.random.default_rng(seed))
    # (0, 1) scores best when f1 carries the weight
    assert assignment.tolist() == [1, 0]


def test_assignment_is_a_bijection(rng):
    points = [point(*rng.random(2)) for _ in range(16)]
    assignment = assign_weights(points, weight_grid(16), rng)
    assert sorted(assignment.tolist()) == list(range(16))


# Archive and hypervolume ------------------------------------------------

def test_archive_matches_brute_force_front(rng):
    archive = Archive()
    points = [point(rng.integers(0, 20) / 20, rng.integers(0, 20) / 20) for _ in range(200)]
    for i, p in enumerate(points):
        archive.update(ArchiveEntry(str(i), p), threshold=0.0)
    expected = {(p.f1, p.f2) for p in nondominated(points)}
    assert {(p.f1, p.f2) for p in archive.points()} == expected
    assert len(archive) == len(expected)


def test_archive_rejects_dominated_and_infeasible():
    archive = Archive()
    assert archive.update(ArchiveEntry("a", point(0.2, 0.2)), 0.0)
    assert not archive.update(ArchiveEntry("b", point(0.3, 0.3)), 0.0)
    assert not archive.update(ArchiveEntry("c", point(0.2, 0.2)), 0.0)
    assert not archive.update(ArchiveEntry("d", point(0.6, 0.01)), 0.5)
    assert [e.genotype for e in archive] == ["a"]


def test_rising_threshold_prunes_members():
    archive = Archive()
    archive.update(ArchiveEntry("cheap", point(0.7, 0.1)), 0.0)
    archive.update(ArchiveEntry("good", point(0.2, 0.8)), 0.0)
    assert len(archive) == 2
    archive.update(ArchiveEntry("other", point(0.3, 0.9)), 0.5)
    assert [e.genotype for e in archive] == ["good"]


def test_hypervolume_examples():
    assert hypervolume_2d([point(0.0, 0.0)], (1.0, 1.0)) == pytest.approx(1.0)
    assert hypervolume_2d([point(0.2, 0.5), point(0.5, 0.2)], (1.0, 1.0)) == pytest.approx(0.55)
    assert hypervolume_2d([]) == 0.0
    assert hypervolume_2d([point(1.2, 0.1)], (1.0, 1.0)) == 0.0


def test_hypervolume_agrees_with_pymoo(rng):
    hv = pytest.importorskip("pymoo.indicators.hv")
    front = nondominated([point(*rng.random(2)) for _ in range(50)])
    expected = hv.HV(ref_point=np.array([1.0, 1.1]))(np.array([[p.f1, p.f2] for p in front]))
    assert hypervolume_2d(front) == pytest.approx(expected, rel=1e-9)


# Variation --------------------------------------------------------------

def test_crossover_edge_cases(rng):
    p1 = np.zeros(10, dtype=np.int64)
    p2 = np.ones(10, dtype=np.int64)
    np.testing.assert_array_equal(ga_generate(p1, p1, rng, mutate=False), p1)
    np.testing.assert_array_equal(ga_generate(p1, p2, rng, cuts=(0, 10), mutate=False), p2)
    child = ga_generate(p1, p2, rng, cuts=(7, 3), mutate=False)
    assert child.tolist() == [0, 0, 0, 1, 1, 1, 1, 0, 0, 0]


def test_mutation_changes_one_gene_on_average():
    rng = np.random.default_rng(0)
    parent = np.zeros(100, dtype=np.int64)
    counts = [int(np.count_nonzero(uniform_mutation(parent, rng))) for _ in range(20000)]
    assert np.mean(counts) == pytest.approx(1.0, abs=0.05)


def test_mutation_respects_alphabets():
    rng = np.random.default_rng(1)
    parent = np.array([1, 0, 1, 2])
    for _ in range(200):
        child = uniform_mutation(parent, rng, probability=1.0)
        assert np.all(child != parent)
        assert child[:-1].max() <= 1 and child[-1] <= 2


def test_replacement_is_confined_to_beaten_parents(rng):
    w = (0.5, 0.5)
    child = point(0.3, 0.3)
    assert ga_replace(child, [(0, point(0.1, 0.1), w), (1, point(0.2, 0.2), w)], 0.0, rng) is None
    assert ga_replace(child, [(0, point(0.1, 0.1), w), (1, point(0.5, 0.5), w)], 0.0, rng) == 1


def test_replacement_picks_either_beaten_parent_evenly():
    rng = np.random.default_rng(2)
    w = (0.5, 0.5)
    parents = [(3, point(0.6, 0.6), w), (7, point(0.5, 0.9), w)]
    picks = [ga_replace(point(0.1, 0.1), parents, 0.0, rng) for _ in range(10_000)]
    assert picks.count(3) / len(picks) == pytest.approx(0.5, abs=0.03)


# Linkage ----------------------------------------------------------------

def test_mutual_information_properties():
    rng = np.random.default_rng(3)
    sample = rng.integers(0, 2, size=(10_000, 4))
    sample[:, 1] = sample[:, 0]
    sample[:, 3] = 0
    mi = mutual_information_matrix(sample)
    np.testing.assert_allclose(mi, mi.T)
    assert mi[0, 2] <= 0.01
    assert mi[0, 1] == pytest.approx(mi[0, 0])
    assert mi[0, 0] == pytest.approx(np.log(2), abs=0.01)
    assert np.all(mi[3] == 0) and np.all(mi[:, 3] == 0)


def test_linkage_tree_of_two_genes():
    assert build_linkage_tree(np.array([[1.0, 0.5], [0.5, 1.0]])) == [[0], [1]]


def test_linkage_tree_finds_planted_blocks():
    rng = np.random.default_rng(4)
    base = rng.integers(0, 2, size=(2000, 2))
    sample = np.repeat(base, 3, axis=1)
    flips = rng.random(sample.shape) < 0.05
    sample = np.where(flips, 1 - sample, sample)
    subsets = build_linkage_tree(mutual_information_matrix(sample))
    assert len(subsets) == 2 * 6 - 2
    assert [0, 1, 2] in subsets and [3, 4, 5] in subsets
    assert all(len(s) < 6 for s in subsets)


def test_kernel_size_bounds():
    rng = np.random.default_rng(5)
    sizes = {sample_kernel_size(512, 8, rng) for _ in range(100_000)}
    assert min(sizes) >= 8 and max(sizes) == 512


def test_neighborhood_orders_by_hamming_distance():
    genotypes = np.array([[0, 0, 0], [1, 1, 1], [0, 0, 1], [0, 1, 1]])
    assert knn_neighborhood(genotypes, 0, 3) == [0, 2, 3]
    assert sorted(knn_neighborhood(genotypes, 1, 4)) == [0, 1, 2, 3]


# Statistics -------------------------------------------------------------

def test_exact_mann_whitney():
    u, p = mann_whitney([1, 2, 3], [4, 5, 6])
    assert u == 0.0
    assert p == pytest.approx(0.1)


def test_tied_samples_use_the_normal_approximation():
    x, y = [1.0, 2.0, 2.0, 3.0], [2.0, 3.0, 3.0, 4.0]
    u, p = mann_whitney(x, y)
    expected = mannwhitneyu(x, y, alternative="two-sided", method="asymptotic")
    assert u == pytest.approx(float(expected.statistic))
    assert p == pytest.approx(float(expected.pvalue))
    assert 0.0 < p < 1.0


def test_identical_samples_are_not_different():
    assert mann_whitney([0.5, 0.5, 0.5], [0.5, 0.5, 0.5]) == (4.5, 1.0)
    report = mann_whitney_holm({"ga": [0.4, 0.5, 0.6], "random": [0.4, 0.5, 0.6]})
    assert not any(c.reject for c in report.comparisons)


def test_holm_step_down():
    assert holm_bonferroni([0.01, 0.04], 0.05) == [True, True]
    assert holm_bonferroni([0.04, 0.03], 0.05) == [False, False]
    assert holm_bonferroni([0.001, 0.2, 0.02], 0.05) == [True, False, True]


def test_best_median_is_compared_against_the_rest():
    groups = {"ga": [4, 5, 6], "random": [1, 2, 3], "gomea": [3.5, 4.5, 5.5]}
    report = mann_whitney_holm(groups)
    assert report.best == "ga"
    assert [c.algorithm for c in report.comparisons] == ["random", "gomea"]


def test_statistics_need_two_groups():
    with pytest.raises(InsufficientSamplesError, match="got 1"):
        mann_whitney_holm({"ga": [1.0, 2.0]})
    with pytest.raises(InsufficientSamplesError):
        mann_whitney_holm({"ga": [1.0], "random": [2.0, 3.0]})
