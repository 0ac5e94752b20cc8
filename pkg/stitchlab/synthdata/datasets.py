"""
Procedural desk-scale classification datasets.

All generators are deterministic in their seed. Class counts are exactly
balanced (the remainder of ``n / classes`` goes to the lowest class ids) and
every dataset is split 60/20/20 into train, validation and test after one
seeded shuffle.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..errors import ConfigurationError, FormatError
from ..netgraph import TaskSignature, decode_array, encode_array, read_document, write_document
from ..netgraph.container import FORMAT_VERSION, WeightBlob

logger = logging.getLogger(__name__)

SPLITS = ("train", "validation", "test")
TABULAR_TASKS = ("two_spirals", "rings")
IMAGE_SIZE = 16


@dataclass(frozen=True, eq=False)
class Dataset:
    """Samples, integer labels and disjoint named index splits."""

    name: str
    samples: np.ndarray
    labels: np.ndarray
    num_classes: int
    splits: Mapping[str, np.ndarray]
    seed: int
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.float32)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if samples.shape[0] != labels.shape[0]:
            raise ConfigurationError(f"{self.name}: {samples.shape[0]} samples but {labels.shape[0]} labels")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ConfigurationError(f"{self.name}: labels outside [0, {self.num_classes})")
        splits = {k: np.asarray(v, dtype=np.int64) for k, v in self.splits.items()}
        seen = np.concatenate(list(splits.values())) if splits else np.empty(0, np.int64)
        if seen.size != np.unique(seen).size:
            raise ConfigurationError(f"{self.name}: splits overlap")
        if seen.size and (seen.min() < 0 or seen.max() >= samples.shape[0]):
            raise ConfigurationError(f"{self.name}: split index out of range")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "splits", splits)
        object.__setattr__(self, "params", dict(self.params))

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def input_shape(self) -> Tuple[int, ...]:
        return tuple(self.samples.shape[1:])

    @property
    def task(self) -> TaskSignature:
        return TaskSignature(self.input_shape, self.num_classes)

    def split(self, name: str, limit: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Samples and labels of one split, truncated to the first ``limit`` entries."""
        if name not in self.splits:
            raise ConfigurationError(f"{self.name}: no split '{name}' (have {sorted(self.splits)})")
        index = self.splits[name]
        if limit is not None:
            index = index[:limit]
        return self.samples[index], self.labels[index]

    def split_size(self, name: str) -> int:
        return int(self.splits[name].shape[0]) if name in self.splits else 0


def _balanced_labels(n: int, classes: int) -> np.ndarray:
    counts = np.full(classes, n // classes)
    counts[: n % classes] += 1
    return np.repeat(np.arange(classes), counts)


def _split_indices(n: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    order = rng.permutation(n)
    n_train = int(round(0.6 * n))
    n_val = int(round(0.2 * n))
    return {
        "train": np.sort(order[:n_train]),
        "validation": np.sort(order[n_train:n_train + n_val]),
        "test": np.sort(order[n_train + n_val:]),
    }


def gen_tabular(seed: int, n: int, task: str = "two_spirals", classes: Optional[int] = None,
                noise: Optional[float] = None, turns: float = 1.0) -> Dataset:
    """Two-dimensional point clouds.

    Args:
        seed: generator seed
        n: number of samples, at least 100
        task: ``two_spirals`` (two interleaved arms) or ``rings`` (concentric rings)
        classes: number of rings; spirals always have 2 classes
        noise: Gaussian jitter added to every coordinate
        turns: spiral arm length in full turns

    Returns:
        A dataset with float32 samples of shape ``[n, 2]``.
    """
    if n < 100:
        raise ConfigurationError(f"tabular datasets need n >= 100, got {n}")
    if task not in TABULAR_TASKS:
        raise ConfigurationError(f"unknown tabular task '{task}' (choose from {TABULAR_TASKS})")
    rng = np.random.default_rng(seed)

    if task == "two_spirals":
        classes = 2
        noise = 0.05 if noise is None else noise
        labels = _balanced_labels(n, classes)
        t = np.sqrt(rng.uniform(0.05, 1.0, size=n)) * turns * 2.0 * np.pi
        angle = t + labels * np.pi
        radius = t / (turns * 2.0 * np.pi)
        points = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
    else:
        classes = classes or 3
        noise = 0.1 if noise is None else noise
        labels = _balanced_labels(n, classes)
        angle = rng.uniform(0.0, 2.0 * np.pi, size=n)
        radius = (labels + 1.0) / classes
        points = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)

    points = points + rng.normal(0.0, noise, size=points.shape)
    shuffle = rng.permutation(n)
    dataset = Dataset(
        name=task,
        samples=points[shuffle],
        labels=labels[shuffle],
        num_classes=classes,
        splits=_split_indices(n, rng),
        seed=seed,
        params={"kind": task, "n": n, "classes": classes, "noise": noise, "turns": turns},
    )
    logger.info(f"[DATA] Generated {task}: n={n}, classes={classes}, seed={seed}")
    return dataset


def _templates(size: int = IMAGE_SIZE) -> List[np.ndarray]:
    """Eight prototype shapes on a ``size`` x ``size`` canvas."""
    c = size // 2
    yy, xx = np.mgrid[0:size, 0:size]
    canvas = lambda: np.zeros((size, size), dtype=np.float64)  # noqa: E731

    hbar = canvas()
    hbar[c - 1:c + 1, 3:size - 3] = 1.0
    vbar = canvas()
    vbar[3:size - 3, c - 1:c + 1] = 1.0
    cross = np.maximum(hbar, vbar)
    diag = (np.abs(yy - xx) <= 1).astype(np.float64)
    diag[:2, :] = diag[-2:, :] = 0.0
    blob = np.exp(-((yy - c + 0.5) ** 2 + (xx - c + 0.5) ** 2) / (2.0 * 2.5 ** 2))
    square = canvas()
    square[4:size - 4, 4:size - 4] = 1.0
    square[6:size - 6, 6:size - 6] = 0.0
    anti = np.fliplr(diag)
    dots = canvas()
    dots[3:6, 3:6] = dots[size - 6:size - 3, size - 6:size - 3] = 1.0
    return [hbar, vbar, cross, diag, blob, square, anti, dots]


def gen_images(seed: int, n: int, classes: int = 4, noise: Optional[float] = None) -> Dataset:
    """Single-channel 16x16 images of procedural shapes, one shape per class.

    Each image is its class template shifted by up to two pixels, scaled by a
    random intensity and covered with Gaussian noise, then clipped to [0, 1].
    """
    if n < 100:
        raise ConfigurationError(f"image datasets need n >= 100, got {n}")
    templates = _templates()
    if not 2 <= classes <= len(templates):
        raise ConfigurationError(f"image datasets support 2..{len(templates)} classes, got {classes}")
    noise = 0.15 if noise is None else noise
    rng = np.random.default_rng(seed)

    labels = rng.permutation(_balanced_labels(n, classes))
    shifts = rng.integers(-2, 3, size=(n, 2))
    intensity = rng.uniform(0.6, 1.0, size=n)
    images = np.empty((n, 1, IMAGE_SIZE, IMAGE_SIZE), dtype=np.float64)
    for i in range(n):
        shape = np.roll(templates[labels[i]], tuple(shifts[i]), axis=(0, 1))
        images[i, 0] = shape * intensity[i]
    images += rng.normal(0.0, noise, size=images.shape)
    np.clip(images, 0.0, 1.0, out=images)

    dataset = Dataset(
        name=f"shapes{classes}",
        samples=images,
        labels=labels,
        num_classes=classes,
        splits=_split_indices(n, rng),
        seed=seed,
        params={"kind": "images", "n": n, "classes": classes, "noise": noise},
    )
    logger.info(f"[DATA] Generated images: n={n}, classes={classes}, seed={seed}")
    return dataset


def generate_dataset(kind: str, seed: int, n: int, classes: int = 4, noise: Optional[float] = None) -> Dataset:
    """Dispatch to :func:`gen_images` or :func:`gen_tabular` by ``kind``."""
    if kind == "images":
        return gen_images(seed, n, classes, noise)
    return gen_tabular(seed, n, kind, classes=classes if kind == "rings" else None, noise=noise)


# Container --------------------------------------------------------------

class DatasetDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format_version: int = FORMAT_VERSION
    name: str
    num_classes: int
    seed: int
    params: Dict[str, Any] = {}
    samples: WeightBlob
    labels: WeightBlob
    splits: Dict[str, List[int]]


def save_dataset(dataset: Dataset, path: Union[str, Path]) -> Path:
    document = DatasetDocument(
        name=dataset.name,
        num_classes=dataset.num_classes,
        seed=dataset.seed,
        params=dict(dataset.params),
        samples=encode_array(dataset.samples),
        labels=encode_array(dataset.labels, dtype="<i8"),
        splits={k: v.tolist() for k, v in dataset.splits.items()},
    )
    path = write_document(document, path)
    logger.info(f"[DATA] Saved dataset '{dataset.name}' ({len(dataset)} samples) to {path}")
    return path


def load_dataset(path: Union[str, Path]) -> Dataset:
    document = read_document(path, DatasetDocument)
    try:
        return Dataset(
            name=document.name,
            samples=decode_array(document.samples, "samples"),
            labels=decode_array(document.labels, "labels", dtype="<i8"),
            num_classes=document.num_classes,
            splits={k: np.asarray(v, dtype=np.int64) for k, v in document.splits.items()},
            seed=document.seed,
            params=document.params,
        )
    except (FormatError, ConfigurationError) as e:
        raise FormatError(f"{path}: {e}") from None
