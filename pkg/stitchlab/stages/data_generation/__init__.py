from .stage import DataGenerationStage

__all__ = ['DataGenerationStage']
