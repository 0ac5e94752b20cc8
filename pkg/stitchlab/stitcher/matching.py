"""
Match candidates between two parents and the acyclic maximum matching.

A match (a, b) inserts a stitch b -> a whose output feeds every consumer of
``a`` (through a switch), and symmetrically a stitch a -> b. In terms of data
dependencies this adds an edge from ``b`` to every consumer of ``a`` and from
``a`` to every consumer of ``b``. Those edges close a cycle exactly when the
merged graph already has a path between ``a`` and ``b`` in either direction,
which is the test :class:`MergeDependencies` performs.

The branch and bound search visits candidates in their deterministic order,
trying "include" before "exclude", and only replaces the incumbent on a
strictly larger matching. The first maximum it meets is therefore the
lexicographically earliest one, which prefers matching early layers.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ..errors import ConfigurationError, MatchingTimeoutError
from ..netgraph import NetworkGraph
from ..tensorcore import LayerKind

logger = logging.getLogger(__name__)

PREFIX_A = "A/"
PREFIX_B = "B/"


class StitchKind(str, Enum):
    LINEAR = "LinearStitch"
    CONV1X1 = "Conv1x1Stitch"


@dataclass(frozen=True)
class MatchCandidate:
    """A shape-compatible pair of layers, one from each parent."""

    node_a: str
    node_b: str
    stitch_kind: StitchKind
    features_a: int
    features_b: int
    spatial: Optional[Tuple[int, int]] = None

    def describe(self) -> str:
        return f"{self.node_a}<->{self.node_b} ({self.stitch_kind.value} {self.features_a}/{self.features_b})"


@dataclass(frozen=True)
class MatchingPlan:
    """Accepted matches in genotype order."""

    matches: Tuple[MatchCandidate, ...] = ()
    timed_out: bool = False
    expansions: int = 0

    def __len__(self) -> int:
        return len(self.matches)

    def __iter__(self):
        return iter(self.matches)

    @property
    def genotype_length(self) -> int:
        return 2 * len(self.matches) + 1


def _eligible(graph: NetworkGraph, stride: int) -> List[str]:
    nodes = [
        node_id for node_id in graph.order
        if node_id not in (graph.input_node, graph.output_node)
        and graph.nodes[node_id].spec.kind not in (LayerKind.SWITCH, LayerKind.MEAN)
    ]
    return nodes[::stride]


def find_candidates(parent_a: NetworkGraph, parent_b: NetworkGraph, stride: int = 1) -> List[MatchCandidate]:
    """All layer pairs that a Linear or 1x1 Conv stitch can connect.

    Two-dimensional outputs pair with a linear stitch. Four-dimensional
    outputs pair with a 1x1 convolution when height and width agree. Input and
    output nodes never match. ``stride`` keeps every stride-th eligible layer
    of each parent.
    """
    if parent_a.task != parent_b.task:
        raise ConfigurationError(
            f"parents solve different tasks: {parent_a.task} vs {parent_b.task}"
        )
    if stride < 1:
        raise ConfigurationError(f"match stride must be >= 1, got {stride}")
    shapes_a, shapes_b = parent_a.shapes, parent_b.shapes
    candidates = []
    for a in _eligible(parent_a, stride):
        sa = shapes_a[a]
        for b in _eligible(parent_b, stride):
            sb = shapes_b[b]
            if len(sa) == 2 and len(sb) == 2:
                candidates.append(MatchCandidate(a, b, StitchKind.LINEAR, sa[1], sb[1]))
            elif len(sa) == 4 and len(sb) == 4 and sa[2:] == sb[2:]:
                candidates.append(MatchCandidate(a, b, StitchKind.CONV1X1, sa[1], sb[1], (sa[2], sa[3])))
    logger.info(f"[MATCHING] {len(candidates)} candidate pair(s) between {parent_a.name} and {parent_b.name}")
    return candidates


class MergeDependencies:
    """Data dependencies of the merged graph under a growing set of matches."""

    def __init__(self, parent_a: NetworkGraph, parent_b: NetworkGraph):
        self.parent_a = parent_a
        self.parent_b = parent_b
        self.graph = nx.DiGraph()
        for prefix, parent in ((PREFIX_A, parent_a), (PREFIX_B, parent_b)):
            for node_id in parent.order:
                self.graph.add_node(self._merged(prefix, parent, node_id))
                for src in parent.nodes[node_id].inputs:
                    self.graph.add_edge(
                        self._merged(prefix, parent, src), self._merged(prefix, parent, node_id)
                    )

    @staticmethod
    def _merged(prefix: str, parent: NetworkGraph, node_id: str) -> str:
        return "input" if node_id == parent.input_node else prefix + node_id

    def _cross_edges(self, match: MatchCandidate) -> List[Tuple[str, str]]:
        a, b = PREFIX_A + match.node_a, PREFIX_B + match.node_b
        edges = [(b, PREFIX_A + c) for c in self.parent_a.consumers[match.node_a]]
        edges += [(a, PREFIX_B + c) for c in self.parent_b.consumers[match.node_b]]
        return edges

    def would_cycle(self, match: MatchCandidate) -> bool:
        a, b = PREFIX_A + match.node_a, PREFIX_B + match.node_b
        return nx.has_path(self.graph, a, b) or nx.has_path(self.graph, b, a)

    def add(self, match: MatchCandidate) -> None:
        self.graph.add_edges_from(self._cross_edges(match))

    def remove(self, match: MatchCandidate) -> None:
        self.graph.remove_edges_from(self._cross_edges(match))


def would_create_cycle(parent_a: NetworkGraph, parent_b: NetworkGraph,
                       accepted: Iterable[MatchCandidate], candidate: MatchCandidate) -> bool:
    """Whether adding ``candidate`` to ``accepted`` makes the merged graph cyclic."""
    deps = MergeDependencies(parent_a, parent_b)
    for match in accepted:
        deps.add(match)
    return deps.would_cycle(candidate)


class _BudgetExceeded(Exception):
    pass


def _upper_bound(remaining: Sequence[MatchCandidate]) -> int:
    return min(len({c.node_a for c in remaining}), len({c.node_b for c in remaining}))


def acyclic_max_matching(parent_a: NetworkGraph, parent_b: NetworkGraph,
                         candidates: Sequence[MatchCandidate],
                         max_expansions: Optional[int] = 200000,
                         strict: bool = False) -> MatchingPlan:
    """Largest node-disjoint set of candidates whose stitches keep the graph acyclic.

    Args:
        parent_a: first parent
        parent_b: second parent
        candidates: output of :func:`find_candidates`, in its order
        max_expansions: node-expansion budget of the search, ``None`` for unlimited
        strict: raise instead of returning the best plan when the budget runs out

    Returns:
        The plan; ``timed_out`` is set when the budget ran out.

    Raises:
        MatchingTimeoutError: only when ``strict`` and the budget was exceeded.
    """
    deps = MergeDependencies(parent_a, parent_b)
    accepted: List[MatchCandidate] = []
    best: List[MatchCandidate] = []
    expansions = 0

    def search(remaining: List[MatchCandidate]) -> None:
        nonlocal best, expansions
        if len(accepted) > len(best):
            best = list(accepted)
        if not remaining or len(accepted) + _upper_bound(remaining) <= len(best):
            return
        expansions += 1
        if max_expansions is not None and expansions > max_expansions:
            raise _BudgetExceeded()
        head, rest = remaining[0], remaining[1:]

        deps.add(head)
        accepted.append(head)
        feasible = [
            c for c in rest
            if c.node_a != head.node_a and c.node_b != head.node_b and not deps.would_cycle(c)
        ]
        search(feasible)
        accepted.pop()
        deps.remove(head)

        search(rest)

    timed_out = False
    try:
        search(list(candidates))
    except _BudgetExceeded:
        timed_out = True
        plan = MatchingPlan(tuple(best), timed_out=True, expansions=expansions)
        message = (
            f"branch and bound exceeded {max_expansions} expansions; "
            f"best plan so far has {len(best)} match(es)"
        )
        if strict:
            raise MatchingTimeoutError(message, best_plan=plan) from None
        logger.warning(f"[MATCHING] {message}")

    plan = MatchingPlan(tuple(best), timed_out=timed_out, expansions=expansions)
    logger.info(f"[MATCHING] Selected {len(plan)} match(es) after {expansions} expansion(s)")
    return plan
