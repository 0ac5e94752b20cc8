"""
Configuration models.

Every tunable of the pipeline lives in one of the pydantic models below. An
experiment is described by a single YAML document that maps onto
:class:`ExperimentConfig`; values are resolved with the precedence
built-in defaults < config file < command-line flags.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

ALGORITHMS = ("ga", "gomea", "lk-gomea", "random")
Algorithm = Literal["ga", "gomea", "lk-gomea", "random"]


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class DatasetConfig(_Config):
    """Which synthetic task to generate."""

    kind: Literal["two_spirals", "rings", "images"] = "images"
    n: int = Field(2000, ge=100)
    classes: int = Field(4, ge=2, le=8)
    noise: Optional[float] = Field(None, ge=0.0)
    seed: int = 0


class TrainConfig(_Config):
    """Minibatch training of a parent network."""

    optimizer: Literal["adam"] = "adam"
    lr: float = Field(1e-3, gt=0.0)
    batch_size: int = Field(32, gt=0)
    sample_budget: int = Field(20000, ge=0)
    loss: Literal["softmax_cross_entropy"] = "softmax_cross_entropy"
    seed: int = 0
    log_every: int = Field(100, gt=0)


class StitchTrainConfig(_Config):
    """Simultaneous training of all stitching layers."""

    method: Literal["adam", "closed_form"] = "closed_form"
    lr: float = Field(1e-3, gt=0.0)
    batch_size: int = Field(32, gt=0)
    sample_budget: int = Field(20000, ge=0)
    ridge: float = Field(1e-6, ge=0.0)
    max_samples: Optional[int] = Field(1024, gt=0)
    seed: int = 0


class RunConfig(_Config):
    """One search run."""

    algorithm: Algorithm = "ga"
    population_size: int = Field(16, ge=2)
    budget: int = Field(2000, ge=1)
    time_limit: Optional[float] = Field(None, gt=0.0)
    seed: int = 0
    workers: int = Field(1, ge=1)
    deterministic: bool = False
    kernel_min_size: int = Field(8, ge=1)
    eval_limit: Optional[int] = Field(1000, gt=0)
    final_threshold: float = Field(0.5, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_sizes(self) -> "RunConfig":
        if self.budget < self.population_size:
            raise ValueError(f"budget {self.budget} is smaller than population size {self.population_size}")
        if self.algorithm == "lk-gomea" and self.kernel_min_size > self.population_size:
            raise ValueError(
                f"kernel_min_size {self.kernel_min_size} exceeds population size {self.population_size}"
            )
        return self


class ExperimentConfig(_Config):
    """Everything needed to go from synthetic data to search statistics."""

    name: str = "desk"
    output_dir: Path = Path("runs/desk")
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    preset: str = "deep_vs_shallow"
    parent_training: TrainConfig = Field(default_factory=TrainConfig)
    stitch_training: StitchTrainConfig = Field(default_factory=StitchTrainConfig)
    match_stride: int = Field(1, ge=1)
    match_budget: Optional[int] = Field(200000, gt=0)
    search: RunConfig = Field(default_factory=RunConfig)
    algorithms: List[Algorithm] = Field(default_factory=lambda: list(ALGORITHMS))
    sweep_sizes: List[int] = Field(default_factory=lambda: [16, 32, 64])
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    ece_bins: int = Field(10, ge=1)

    @field_validator("seeds")
    @classmethod
    def _seeds_non_empty(cls, seeds: List[int]) -> List[int]:
        if not seeds:
            raise ValueError("at least one seed is required")
        return seeds

    @field_validator("sweep_sizes")
    @classmethod
    def _sizes_valid(cls, sizes: List[int]) -> List[int]:
        if not sizes or min(sizes) < 2:
            raise ValueError("sweep sizes must be a non-empty list of sizes >= 2")
        return sizes


def _deep_merge(base: Dict[str, Any], updates: Mapping[str, Any], skip_none: bool = True) -> Dict[str, Any]:
    """Merge ``updates`` into ``base``; an explicit ``None`` clears a value unless ``skip_none``.

    A ``None`` never replaces a whole section, so an empty YAML section keeps its defaults.
    """
    merged = dict(base)
    for key, value in updates.items():
        if value is None and (skip_none or isinstance(merged.get(key), dict)):
            continue
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value, skip_none)
        else:
            merged[key] = value
    return merged


def load_experiment_config(path: Optional[Union[str, Path]] = None,
                           overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Resolve an experiment configuration.

    Args:
        path: optional YAML file; missing keys fall back to defaults, ``null`` clears a value
        overrides: nested mapping of flag values; ``None`` leaves a field alone

    Raises:
        ConfigurationError: unreadable file or invalid values
    """
    data = ExperimentConfig().model_dump(mode="json")
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file {path} does not exist")
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"{path}: invalid YAML ({e})") from None
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{path}: top level must be a mapping")
        data = _deep_merge(data, raw, skip_none=False)
    data = _deep_merge(data, overrides or {})
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid configuration: {e}") from None


def save_experiment_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False), encoding="utf-8")
    logger.info(f"[CONFIG] Wrote configuration to {path}")
    return path


def make_run_config(**values: Any) -> RunConfig:
    """Build a :class:`RunConfig`, reporting validation problems as ConfigurationError."""
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ConfigurationError(f"invalid run configuration: {e}") from None
