"""Synthetic datasets, parent presets and parent training."""

from .datasets import (
    Dataset,
    gen_images,
    gen_tabular,
    generate_dataset,
    load_dataset,
    save_dataset,
)
from .presets import PRESETS, build_parent_pair
from .training import (
    TrainingOutcome,
    accuracy_of,
    evaluate_accuracy,
    predict_logits,
    softmax,
    softmax_cross_entropy,
    train_parent,
)

__all__ = [
    "Dataset",
    "PRESETS",
    "TrainingOutcome",
    "accuracy_of",
    "build_parent_pair",
    "evaluate_accuracy",
    "gen_images",
    "gen_tabular",
    "generate_dataset",
    "load_dataset",
    "predict_logits",
    "save_dataset",
    "softmax",
    "softmax_cross_entropy",
    "train_parent",
]
