from .stage import ParentTrainingStage

__all__ = ['ParentTrainingStage']
