"""
Objective points, Tschebysheff scalarization, steering and weight assignment.

Both objectives are minimized: ``f1 = 1 - accuracy`` and ``f2 = madds /
ensemble_madds``. The utopian point is the origin.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError

WEIGHT_EPSILON = 1e-6

Weight = Tuple[float, float]


@dataclass(frozen=True)
class ObjectivePoint:
    accuracy: float
    madds: int
    f1: float
    f2: float

    @classmethod
    def from_result(cls, accuracy: float, madds: int, reference_madds: int) -> "ObjectivePoint":
        if reference_madds <= 0:
            raise ConfigurationError(f"normalizing cost must be positive, got {reference_madds}")
        return cls(accuracy=float(accuracy), madds=int(madds), f1=1.0 - float(accuracy),
                   f2=float(madds) / float(reference_madds))

    @property
    def objectives(self) -> Tuple[float, float]:
        return (self.f1, self.f2)


def tschebysheff(point: ObjectivePoint, weight: Weight) -> float:
    """``max(w1 * f1, w2 * f2)``; lower is better."""
    return max(weight[0] * point.f1, weight[1] * point.f2)


def weakly_dominates(a: ObjectivePoint, b: ObjectivePoint) -> bool:
    return a.f1 <= b.f1 and a.f2 <= b.f2


def dominates(a: ObjectivePoint, b: ObjectivePoint) -> bool:
    return weakly_dominates(a, b) and (a.f1 < b.f1 or a.f2 < b.f2)


def same_objectives(a: ObjectivePoint, b: ObjectivePoint) -> bool:
    return a.accuracy == b.accuracy and a.madds == b.madds


def constrained_better(a: ObjectivePoint, b: ObjectivePoint, threshold: float, weight: Weight) -> bool:
    """Whether ``a`` beats ``b`` when solutions below ``threshold`` accuracy are always worse.

    A feasible solution beats an infeasible one; between two infeasible
    solutions the more accurate wins; between two feasible ones the lower
    scalarization wins. Exact ties are not better.
    """
    feasible_a = a.accuracy >= threshold
    feasible_b = b.accuracy >= threshold
    if feasible_a != feasible_b:
        return feasible_a
    if not feasible_a:
        return a.accuracy > b.accuracy
    return tschebysheff(a, weight) < tschebysheff(b, weight)


@dataclass(frozen=True)
class SteeringSchedule:
    """Accuracy threshold rising linearly to ``final`` over the first half of the budget."""

    budget: int
    final: float = 0.5

    def threshold(self, evaluations: int) -> float:
        if self.budget <= 0:
            return self.final
        return self.final * min(1.0, 2.0 * evaluations / self.budget)


def weight_grid(n: int, epsilon: float = WEIGHT_EPSILON) -> np.ndarray:
    """``n`` weight vectors ``(w, 1 - w)`` with ``w`` evenly spaced over ``[eps, 1 - eps]``."""
    if n < 1:
        raise ConfigurationError(f"need at least one weight, got {n}")
    if n == 1:
        w = np.array([0.5])
    else:
        w = epsilon + (1.0 - 2.0 * epsilon) * np.arange(n) / (n - 1)
    return np.stack([w, 1.0 - w], axis=1)


def assign_weights(points: Sequence[ObjectivePoint], weights: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    """Give each weight, in random order, to the unassigned individual it scores best.

    Returns:
        ``assignment[i]`` = index of the weight held by individual ``i``.
    """
    if len(points) != len(weights):
        raise ConfigurationError(f"{len(points)} individuals but {len(weights)} weights")
    assignment = np.full(len(points), -1, dtype=np.int64)
    unassigned = list(range(len(points)))
    for w_index in rng.permutation(len(weights)):
        weight = tuple(weights[w_index])
        best = min(unassigned, key=lambda i: (tschebysheff(points[i], weight), i))
        assignment[best] = w_index
        unassigned.remove(best)
    return assignment
