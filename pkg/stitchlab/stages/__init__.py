from .base_stage import ArtifactPaths, BaseStage, StageResult, record_timing
from .data_generation import DataGenerationStage
from .parent_training import ParentTrainingStage
from .reporting import ReportingStage
from .search import SearchStage
from .statistics import StatisticsStage
from .stitch_training import StitchTrainingStage
from .stitching import StitchingStage

__all__ = [
    'ArtifactPaths',
    'BaseStage',
    'DataGenerationStage',
    'ParentTrainingStage',
    'ReportingStage',
    'SearchStage',
    'StageResult',
    'StatisticsStage',
    'StitchTrainingStage',
    'StitchingStage',
    'record_timing',
]
