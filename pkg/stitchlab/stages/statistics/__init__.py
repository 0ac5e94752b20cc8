from .stage import StatisticsStage, collect_hypervolumes

__all__ = ['StatisticsStage', 'collect_hypervolumes']
