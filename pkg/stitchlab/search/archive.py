"""Elitist archive under a rising accuracy threshold, and 2-D hypervolume."""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from .objectives import ObjectivePoint, weakly_dominates

logger = logging.getLogger(__name__)

HV_REFERENCE = (1.0, 1.1)


@dataclass(frozen=True)
class ArchiveEntry:
    genotype: str
    point: ObjectivePoint
    stitches: int = 0


class Archive:
    """Mutually non-dominated feasible solutions.

    Insertion uses weak dominance: a candidate equal to a member in both
    objectives is rejected, and a candidate removes every member it weakly
    dominates.
    """

    def __init__(self):
        self._entries: List[ArchiveEntry] = []

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    @property
    def entries(self) -> List[ArchiveEntry]:
        return list(self._entries)

    def points(self) -> List[ObjectivePoint]:
        return [e.point for e in self._entries]

    def prune(self, threshold: float) -> int:
        before = len(self._entries)
        self._entries = [e for e in self._entries if e.point.accuracy >= threshold]
        removed = before - len(self._entries)
        if removed:
            logger.debug(f"[ARCHIVE] Pruned {removed} member(s) below threshold {threshold:.4f}")
        return removed

    def update(self, candidate: ArchiveEntry, threshold: float) -> bool:
        """Insert ``candidate`` if feasible and not weakly dominated. Returns whether it was inserted."""
        self.prune(threshold)
        point = candidate.point
        if point.accuracy < threshold:
            return False
        if any(weakly_dominates(e.point, point) for e in self._entries):
            return False
        self._entries = [e for e in self._entries if not weakly_dominates(point, e.point)]
        self._entries.append(candidate)
        return True

    def hypervolume(self, reference: Tuple[float, float] = HV_REFERENCE) -> float:
        return hypervolume_2d(self.points(), reference)

    def sorted_entries(self) -> List[ArchiveEntry]:
        return sorted(self._entries, key=lambda e: (e.point.f1, e.point.f2, e.genotype))


def update_archive(archive: Archive, candidate: ArchiveEntry, threshold: float) -> Archive:
    archive.update(candidate, threshold)
    return archive


def hypervolume_2d(front: Iterable[ObjectivePoint], reference: Tuple[float, float] = HV_REFERENCE) -> float:
    """Area dominated by ``front`` inside the box bounded by ``reference``.

    Points outside the box contribute nothing; dominated points are tolerated.
    """
    ref1, ref2 = reference
    points = sorted((p.f1, p.f2) for p in front if p.f1 < ref1 and p.f2 < ref2)
    area, best_f2 = 0.0, ref2
    for f1, f2 in points:
        if f2 < best_f2:
            area += (ref1 - f1) * (best_f2 - f2)
            best_f2 = f2
    return area


def nondominated(points: Sequence[ObjectivePoint]) -> List[ObjectivePoint]:
    """Distinct objective vectors not dominated by any other point."""
    unique = {(p.f1, p.f2): p for p in points}
    return [
        p for key, p in unique.items()
        if not any(q != key and q[0] <= key[0] and q[1] <= key[1] for q in unique)
    ]
