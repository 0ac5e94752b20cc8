"""
Linkage learning: mutual information, UPGMA linkage trees and kernel neighborhoods.
"""

import math
from typing import List

import numpy as np

from ..errors import ConfigurationError, GenotypeError

ALPHABET = 3


def mutual_information_matrix(sample: np.ndarray) -> np.ndarray:
    """Pairwise mutual information (natural log) from empirical joint frequencies.

    Args:
        sample: genotypes ``[k, ell]`` with genes in ``{0, 1, 2}``

    Returns:
        Symmetric ``[ell, ell]`` matrix whose diagonal holds the marginal entropies.
    """
    sample = np.asarray(sample, dtype=np.int64)
    if sample.ndim != 2 or sample.shape[0] < 2:
        raise GenotypeError(f"mutual information needs at least 2 genotypes, got shape {sample.shape}")
    if sample.min() < 0 or sample.max() >= ALPHABET:
        raise GenotypeError(f"genes must lie in [0, {ALPHABET})")
    k = sample.shape[0]
    onehot = np.eye(ALPHABET)[sample]
    joint = np.einsum("sia,sjb->ijab", onehot, onehot) / k
    marginal = onehot.mean(axis=0)
    expected = marginal[:, None, :, None] * marginal[None, :, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(joint > 0, joint * np.log(joint / expected), 0.0)
    mi = terms.sum(axis=(2, 3))
    mi = np.maximum(0.5 * (mi + mi.T), 0.0)
    return mi


def build_linkage_tree(mi: np.ndarray) -> List[List[int]]:
    """UPGMA on mutual information, returned as a family of subsets.

    Singletons come first in index order, followed by every merge in merge
    order; the root (all indices) is left out. The most similar pair merges
    first, ties going to the pair with the smallest indices.
    """
    mi = np.asarray(mi, dtype=np.float64)
    if mi.ndim != 2 or mi.shape[0] != mi.shape[1]:
        raise ConfigurationError(f"mutual information must be square, got {mi.shape}")
    ell = mi.shape[0]
    if ell == 1:
        return [[0]]
    similarity = mi.copy()
    np.fill_diagonal(similarity, -np.inf)
    active = np.ones(ell, dtype=bool)
    members = {i: [i] for i in range(ell)}
    upper = np.triu(np.ones((ell, ell), dtype=bool), k=1)
    subsets = [[i] for i in range(ell)]

    for _ in range(ell - 1):
        masked = np.where(upper & active[:, None] & active[None, :], similarity, -np.inf)
        r, c = np.unravel_index(int(np.argmax(masked)), masked.shape)
        size_r, size_c = len(members[r]), len(members[c])
        merged_row = (size_r * similarity[r] + size_c * similarity[c]) / (size_r + size_c)
        similarity[r, :] = merged_row
        similarity[:, r] = merged_row
        similarity[r, r] = -np.inf
        active[c] = False
        members[r] = sorted(members[r] + members.pop(c))
        subsets.append(list(members[r]))

    subsets.pop()
    return subsets


def sample_kernel_size(n: int, c: int, rng: np.random.Generator) -> int:
    """Neighborhood size ``ceil(n / m)`` for ``m`` uniform in ``[1, n // c]``."""
    if not 1 <= c <= n:
        raise ConfigurationError(f"kernel size needs n >= c >= 1, got n={n}, c={c}")
    m = int(rng.integers(1, max(1, n // c) + 1))
    return math.ceil(n / m)


def knn_neighborhood(genotypes: np.ndarray, individual: int, k: int) -> List[int]:
    """The ``k`` nearest genotypes by Hamming distance, ``individual`` first, ties by index."""
    genotypes = np.asarray(genotypes)
    n = genotypes.shape[0]
    if not 1 <= k <= n:
        raise ConfigurationError(f"neighborhood size {k} outside [1, {n}]")
    distances = (genotypes != genotypes[individual]).sum(axis=1)
    others = [j for j in range(n) if j != individual]
    others.sort(key=lambda j: (int(distances[j]), j))
    return [individual] + others[:k - 1]
