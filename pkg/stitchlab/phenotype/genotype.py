"""Genotype encoding and sampling."""

from typing import Sequence

import numpy as np

from ..errors import GenotypeError

# Expected number of stitched genes in a biased sample.
BIASED_ONES = 6.18


def to_digits(genotype: Sequence[int]) -> str:
    """Digit-string form used in logs and CSV files, e.g. ``"0010...2"``."""
    return "".join(str(int(v)) for v in genotype)


def from_digits(digits: str) -> np.ndarray:
    if not digits or not digits.isdigit():
        raise GenotypeError(f"'{digits}' is not a digit string")
    return np.fromiter((int(c) for c in digits), dtype=np.int64, count=len(digits))


def reference_genotype(length: int, output_choice: int) -> np.ndarray:
    """All inner switches at their original input, output switch at ``output_choice``.

    ``output_choice`` 0 is parent A, 1 is parent B and 2 the ensemble.
    """
    if length < 1 or output_choice not in (0, 1, 2):
        raise GenotypeError(f"no reference genotype for length {length} and output {output_choice}")
    genotype = np.zeros(length, dtype=np.int64)
    genotype[-1] = output_choice
    return genotype


def biased_probability(length: int) -> float:
    return min(1.0, BIASED_ONES / length)


def biased_sample(length: int, rng: np.random.Generator) -> np.ndarray:
    """Inner genes are 1 with probability ``min(1, 6.18 / length)``; the output gene is uniform."""
    if length < 1:
        raise GenotypeError(f"genotype length must be >= 1, got {length}")
    genotype = (rng.random(length) < biased_probability(length)).astype(np.int64)
    genotype[-1] = rng.integers(0, 3)
    return genotype


def uniform_sample(length: int, rng: np.random.Generator) -> np.ndarray:
    genotype = rng.integers(0, 2, size=length).astype(np.int64)
    genotype[-1] = rng.integers(0, 3)
    return genotype


def alphabet_sizes(length: int) -> np.ndarray:
    sizes = np.full(length, 2, dtype=np.int64)
    sizes[-1] = 3
    return sizes


def changed_indices(before: Sequence[int], after: Sequence[int]) -> np.ndarray:
    before = np.asarray(before)
    after = np.asarray(after)
    if before.shape != after.shape:
        raise GenotypeError(f"genotype lengths differ: {before.size} vs {after.size}")
    return np.flatnonzero(before != after)
