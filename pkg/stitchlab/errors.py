"""Exception hierarchy shared by every stitchlab module."""

from typing import Any, List, Optional


class StitchLabError(Exception):
    """Base class for all errors raised by stitchlab."""


class ShapeMismatchError(StitchLabError, ValueError):
    """A tensor shape does not agree with a layer specification."""


class CycleError(StitchLabError):
    """A graph that must be acyclic contains a cycle."""

    def __init__(self, message: str, cycle: Optional[List[str]] = None):
        super().__init__(message)
        self.cycle = list(cycle or [])


class GraphError(StitchLabError, ValueError):
    """A graph is structurally invalid (unknown inputs, bad arity, ...)."""


class FormatError(StitchLabError, ValueError):
    """An artifact file could not be parsed."""


class FormatVersionError(FormatError):
    """An artifact file was written with an unsupported format version."""


class TrainingDivergedError(StitchLabError, RuntimeError):
    """The training loss became non-finite."""


class SingularSystemError(StitchLabError, ValueError):
    """The least-squares normal equations are singular."""


class GenotypeError(StitchLabError, ValueError):
    """A genotype does not fit the supernetwork it is applied to."""


class CalibrationError(StitchLabError, ValueError):
    """Probability rows handed to the calibration code are not normalized."""


class ConfigurationError(StitchLabError, ValueError):
    """A configuration is inconsistent or incomplete."""


class InsufficientSamplesError(StitchLabError, ValueError):
    """A statistical procedure received too few samples or groups."""


class MissingArtifactError(StitchLabError, FileNotFoundError):
    """A step needs an artifact that a previous step did not produce."""


class MatchingTimeoutError(StitchLabError, TimeoutError):
    """The branch and bound matcher ran out of node expansions."""

    def __init__(self, message: str, best_plan: Any = None):
        super().__init__(message)
        self.best_plan = best_plan
