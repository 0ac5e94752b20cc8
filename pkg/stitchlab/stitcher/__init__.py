"""Candidate matching, supernetwork construction and stitch training."""

from .matching import (
    MatchCandidate,
    MatchingPlan,
    MergeDependencies,
    StitchKind,
    acyclic_max_matching,
    find_candidates,
    would_create_cycle,
)
from .supernet import (
    ENSEMBLE_ID,
    OUTPUT_SWITCH_ID,
    Supernetwork,
    SwitchEntry,
    build_supernetwork,
    extract_parent,
    load_supernetwork,
    save_supernetwork,
)
from .training import (
    StitchReport,
    StitchTrainingReport,
    capture_activations,
    solve_stitch_least_squares,
    train_stitches,
)

__all__ = [
    "ENSEMBLE_ID",
    "MatchCandidate",
    "MatchingPlan",
    "MergeDependencies",
    "OUTPUT_SWITCH_ID",
    "StitchKind",
    "StitchReport",
    "StitchTrainingReport",
    "Supernetwork",
    "SwitchEntry",
    "acyclic_max_matching",
    "build_supernetwork",
    "capture_activations",
    "extract_parent",
    "find_candidates",
    "load_supernetwork",
    "save_supernetwork",
    "solve_stitch_least_squares",
    "train_stitches",
    "would_create_cycle",
]
