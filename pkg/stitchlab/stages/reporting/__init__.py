from .stage import ReportingStage, mark_front

__all__ = ['ReportingStage', 'mark_front']
