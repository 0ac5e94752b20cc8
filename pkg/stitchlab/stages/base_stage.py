import json
import logging
import time
from abc import ABC, abstractmethod
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

from pydantic import BaseModel

from ..errors import MissingArtifactError

logger = logging.getLogger(__name__)


class StageResult(BaseModel):
    """Result of one pipeline stage."""
    success: bool
    data: Dict[str, Any]
    error: Optional[str] = None


@dataclass(frozen=True)
class ArtifactPaths:
    """File layout of one experiment directory."""

    root: Path

    @property
    def dataset(self) -> Path:
        return self.root / "dataset.data"

    def parent(self, side: str) -> Path:
        return self.root / f"parent_{side}.net"

    @property
    def supernet(self) -> Path:
        return self.root / "stitched.supernet"

    @property
    def trained_supernet(self) -> Path:
        return self.root / "trained.supernet"

    @property
    def stitch_report(self) -> Path:
        return self.root / "stitch_report.json"

    @property
    def timing(self) -> Path:
        return self.root / "timing.json"

    @property
    def config(self) -> Path:
        return self.root / "config.yaml"

    def run_dir(self, algorithm: str, seed: int, population_size: Optional[int] = None) -> Path:
        name = f"seed{seed}" if population_size is None else f"n{population_size}_seed{seed}"
        return self.root / "runs" / algorithm / name

    def require(self, path: Path) -> Path:
        if not path.exists():
            raise MissingArtifactError(f"required artifact not found: {path}")
        return path


def record_timing(path: Path, **seconds: float) -> Dict[str, float]:
    """Merge step durations into the timing report at ``path``."""
    timing: Dict[str, float] = {}
    if path.exists():
        timing = json.loads(path.read_text(encoding="utf-8"))
    timing.update({k: round(v, 3) for k, v in seconds.items()})
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(timing, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return timing


@contextmanager
def stopwatch(timings: Dict[str, float], key: str) -> Iterator[None]:
    started = time.perf_counter()
    try:
        yield
    finally:
        timings[key] = time.perf_counter() - started


class BaseStage(ABC):
    """Base class for all pipeline stages."""

    def __init__(self, name: str, description: str):
        self.name = name
        self.description = description

    @abstractmethod
    async def process(self, context: Dict[str, Any]) -> StageResult:
        """Run the stage.

        Args:
            context: shared pipeline state (configuration, artifact paths and
                objects produced by earlier stages)

        Returns:
            StageResult with the produced objects in ``data``
        """
        pass

    def failure(self, error: Exception) -> StageResult:
        logger.error(f"[{self.name.upper()}] {type(error).__name__}: {error}", exc_info=True)
        return StageResult(success=False, data={}, error=f"{self.name}: {error}")

    def __str__(self):
        return f"{self.name}: {self.description}"
