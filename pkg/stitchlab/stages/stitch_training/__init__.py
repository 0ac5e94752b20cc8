from .stage import StitchTrainingStage

__all__ = ['StitchTrainingStage']
