"""Comparing algorithms: Mann-Whitney U tests with Holm-Bonferroni correction."""

import logging
from typing import List, Mapping, Sequence

import numpy as np
from pydantic import BaseModel
from scipy.stats import mannwhitneyu

from ..errors import InsufficientSamplesError

logger = logging.getLogger(__name__)

EXACT_MAX_GROUP = 10


class PairwiseComparison(BaseModel):
    algorithm: str
    median: float
    u_statistic: float
    p_value: float
    reject: bool


class StatisticsReport(BaseModel):
    best: str
    best_median: float
    alpha: float
    comparisons: List[PairwiseComparison]


def mann_whitney(x: Sequence[float], y: Sequence[float]) -> tuple:
    """Two-sided U statistic of ``x`` and its p-value.

    Exact for tie-free groups of at most 10, otherwise the tie-corrected
    normal approximation.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pooled = np.concatenate([x, y])
    if np.all(pooled == x[0]):
        return float(len(x) * len(y)) / 2.0, 1.0
    tied = np.unique(pooled).size < pooled.size
    method = "exact" if max(len(x), len(y)) <= EXACT_MAX_GROUP and not tied else "asymptotic"
    result = mannwhitneyu(x, y, alternative="two-sided", method=method)
    return float(result.statistic), min(1.0, float(result.pvalue))


def holm_bonferroni(p_values: Sequence[float], alpha: float = 0.05) -> List[bool]:
    """Holm step-down: the r-th smallest p-value is tested against ``alpha / (m - r)``."""
    m = len(p_values)
    reject = [False] * m
    for rank, i in enumerate(sorted(range(m), key=lambda i: (p_values[i], i))):
        if p_values[i] > alpha / (m - rank):
            break
        reject[i] = True
    return reject


def mann_whitney_holm(groups: Mapping[str, Sequence[float]], alpha: float = 0.05) -> StatisticsReport:
    """Compare the group with the highest median against every other group.

    Raises:
        InsufficientSamplesError: fewer than two groups, or a group with fewer than two samples.
    """
    if len(groups) < 2:
        raise InsufficientSamplesError(f"need ≥2 groups, got {len(groups)}")
    for name, values in groups.items():
        if len(values) < 2:
            raise InsufficientSamplesError(f"need ≥2 samples for '{name}', got {len(values)}")
    medians = {name: float(np.median(values)) for name, values in groups.items()}
    best = max(medians, key=lambda name: medians[name])
    others = [name for name in groups if name != best]
    tests = [mann_whitney(groups[best], groups[name]) for name in others]
    decisions = holm_bonferroni([p for _, p in tests], alpha)
    comparisons = [
        PairwiseComparison(algorithm=name, median=medians[name], u_statistic=u, p_value=p, reject=reject)
        for name, (u, p), reject in zip(others, tests, decisions)
    ]
    logger.info(
        f"[STATISTICS] Best median: {best} ({medians[best]:.5f}); "
        f"{sum(decisions)}/{len(decisions)} difference(s) significant at alpha={alpha}"
    )
    return StatisticsReport(best=best, best_median=medians[best], alpha=alpha, comparisons=comparisons)
