from typing import Dict, Type

from ...errors import ConfigurationError
from .base import SearchAlgorithm
from .ga import GeneticAlgorithm
from .gomea import GOMEA, LKGOMEA
from .random_search import RandomSearch

ALGORITHM_CLASSES: Dict[str, Type[SearchAlgorithm]] = {
    cls.name: cls for cls in (GeneticAlgorithm, GOMEA, LKGOMEA, RandomSearch)
}


def algorithm_class(name: str) -> Type[SearchAlgorithm]:
    try:
        return ALGORITHM_CLASSES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown algorithm '{name}', expected one of {sorted(ALGORITHM_CLASSES)}"
        ) from None


__all__ = ['ALGORITHM_CLASSES', 'GOMEA', 'GeneticAlgorithm', 'LKGOMEA', 'RandomSearch',
           'SearchAlgorithm', 'algorithm_class']
