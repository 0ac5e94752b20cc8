"""Expected calibration error of predicted-class probabilities."""

from dataclasses import dataclass
from typing import List

import numpy as np

from ..errors import CalibrationError


@dataclass(frozen=True)
class CalibrationBin:
    lower: float
    upper: float
    count: int
    accuracy: float
    confidence: float

    @property
    def gap(self) -> float:
        return abs(self.accuracy - self.confidence) if self.count else 0.0


@dataclass(frozen=True)
class CalibrationReport:
    ece: float
    bins: List[CalibrationBin]

    @property
    def max_gap(self) -> float:
        return max((b.gap for b in self.bins), default=0.0)


def compute_ece(probabilities: np.ndarray, labels: np.ndarray, num_bins: int = 10) -> CalibrationReport:
    """Equal-width binning of the maximum predicted probability.

    Bin ``i`` covers ``(i / num_bins, (i + 1) / num_bins]``; a confidence of
    exactly 0 falls in the first bin. The error is the sample-weighted mean of
    ``|accuracy - confidence|`` over non-empty bins.

    Raises:
        CalibrationError: rows do not sum to 1 within 1e-4, or ``num_bins < 1``.
    """
    probs = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels)
    if num_bins < 1:
        raise CalibrationError(f"num_bins must be >= 1, got {num_bins}")
    if probs.ndim != 2 or probs.shape[0] != labels.shape[0]:
        raise CalibrationError(f"expected [N, K] probabilities for {labels.shape[0]} labels, got {probs.shape}")
    sums = probs.sum(axis=1)
    if probs.size and np.max(np.abs(sums - 1.0)) > 1e-4:
        worst = int(np.argmax(np.abs(sums - 1.0)))
        raise CalibrationError(f"probability row {worst} sums to {sums[worst]:.6f}, not 1")

    confidence = probs.max(axis=1) if probs.size else np.empty(0)
    correct = (probs.argmax(axis=1) == labels) if probs.size else np.empty(0, dtype=bool)
    which = np.clip(np.ceil(confidence * num_bins).astype(np.int64) - 1, 0, num_bins - 1)

    total = labels.shape[0]
    edges = np.linspace(0.0, 1.0, num_bins + 1)
    bins, ece = [], 0.0
    for i in range(num_bins):
        in_bin = which == i
        count = int(in_bin.sum())
        acc = float(correct[in_bin].mean()) if count else 0.0
        conf = float(confidence[in_bin].mean()) if count else 0.0
        bins.append(CalibrationBin(float(edges[i]), float(edges[i + 1]), count, acc, conf))
        if count:
            ece += count / total * abs(acc - conf)
    return CalibrationReport(ece=float(ece), bins=bins)
