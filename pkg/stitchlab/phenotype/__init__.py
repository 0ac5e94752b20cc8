"""Genotypes, decoding, evaluation with skipping, and calibration."""

from .calibration import CalibrationBin, CalibrationReport, compute_ece
from .decode import EvalResult, Evaluator, count_stitches, decode, evaluate, maybe_skip, reference_madds
from .genotype import (
    BIASED_ONES,
    alphabet_sizes,
    biased_probability,
    biased_sample,
    changed_indices,
    from_digits,
    reference_genotype,
    to_digits,
    uniform_sample,
)

__all__ = [
    "BIASED_ONES",
    "CalibrationBin",
    "CalibrationReport",
    "EvalResult",
    "Evaluator",
    "alphabet_sizes",
    "biased_probability",
    "biased_sample",
    "changed_indices",
    "compute_ece",
    "count_stitches",
    "decode",
    "evaluate",
    "from_digits",
    "maybe_skip",
    "reference_genotype",
    "reference_madds",
    "to_digits",
    "uniform_sample",
]
