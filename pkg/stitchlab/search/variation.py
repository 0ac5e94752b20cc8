"""Genetic-algorithm variation and parent replacement."""

from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import GenotypeError
from ..phenotype import alphabet_sizes
from .objectives import ObjectivePoint, Weight, constrained_better


def two_point_crossover(p1: np.ndarray, p2: np.ndarray, cuts: Tuple[int, int]) -> np.ndarray:
    """Genes in ``[lo, hi)`` from ``p2``, the rest from ``p1``."""
    lo, hi = sorted(cuts)
    child = np.array(p1, dtype=np.int64, copy=True)
    child[lo:hi] = p2[lo:hi]
    return child


def uniform_mutation(genotype: np.ndarray, rng: np.random.Generator,
                     probability: Optional[float] = None) -> np.ndarray:
    """Move each gene, with probability ``1 / ell``, to a different value of its alphabet."""
    ell = genotype.shape[0]
    probability = 1.0 / ell if probability is None else probability
    sizes = alphabet_sizes(ell)
    mutated = np.array(genotype, dtype=np.int64, copy=True)
    hit = rng.random(ell) < probability
    if hit.any():
        # shift by 1..size-1 so a mutated gene always changes
        shift = 1 + np.floor(rng.random(int(hit.sum())) * (sizes[hit] - 1)).astype(np.int64)
        mutated[hit] = (mutated[hit] + shift) % sizes[hit]
    return mutated


def ga_generate(p1: Sequence[int], p2: Sequence[int], rng: np.random.Generator,
                cuts: Optional[Tuple[int, int]] = None, mutate: bool = True) -> np.ndarray:
    """Two-point crossover followed by uniform mutation.

    Args:
        p1: outer-segment parent
        p2: inner-segment parent
        rng: random generator
        cuts: fixed cut points; drawn uniformly from ``[0, ell]`` when omitted
        mutate: apply uniform mutation after crossover
    """
    p1 = np.asarray(p1, dtype=np.int64)
    p2 = np.asarray(p2, dtype=np.int64)
    if p1.shape != p2.shape:
        raise GenotypeError(f"parents differ in length: {p1.size} vs {p2.size}")
    ell = p1.shape[0]
    if cuts is None:
        cuts = tuple(int(c) for c in rng.integers(0, ell + 1, size=2))
    child = two_point_crossover(p1, p2, cuts)
    return uniform_mutation(child, rng) if mutate else child


def ga_replace(child: ObjectivePoint, parents: Sequence[Tuple[int, ObjectivePoint, Weight]],
               threshold: float, rng: np.random.Generator) -> Optional[int]:
    """Pick a parent slot to overwrite with ``child``.

    Args:
        child: the child's objectives
        parents: ``(slot, objectives, weight held by that slot)`` per parent
        threshold: current accuracy threshold
        rng: random generator

    Returns:
        The slot to replace, chosen uniformly among the parents the child
        beats, or ``None`` when it beats neither.
    """
    beaten = [slot for slot, point, weight in parents if constrained_better(child, point, threshold, weight)]
    if not beaten:
        return None
    return beaten[int(rng.integers(0, len(beaten)))]
