from .stage import SearchStage

__all__ = ['SearchStage']
