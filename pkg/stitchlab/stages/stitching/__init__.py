from .stage import StitchingStage

__all__ = ['StitchingStage']
