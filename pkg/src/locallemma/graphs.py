"""Dependency graphs, independent sets, and stable set sequences.

Events are indexed 0..n-1.  A dependency graph records which pairs of
events may interfere; everything downstream (the resampling engine, the
independence polynomials, the convergence criteria) only ever asks two
questions of it: how many events there are, and whether two events are
adjacent.  ``DependencyGraph`` stores adjacency explicitly and suits
desk-scale work; ``RuleGraph`` evaluates adjacency through a predicate
and suits application instances whose edge sets are far too large to
materialize.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

#: Largest n for which exhaustive independent-set enumeration is allowed.
ENUMERATION_CAP = 25


class DependencyGraph:
    """Undirected simple graph on event indices 0..n-1."""

    __slots__ = ("n", "_adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()) -> None:
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        self.n = n
        self._adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            self.add_edge(u, v)

    def add_edge(self, u: int, v: int) -> None:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge ({u},{v}) out of range for n={self.n}")
        if u == v:
            raise ValueError(f"self-loop at {u} not allowed")
        self._adj[u].add(v)
        self._adj[v].add(u)

    def neighbors(self, i: int) -> frozenset[int]:
        return frozenset(self._adj[i])

    def adjacent(self, i: int, j: int) -> bool:
        return j in self._adj[i]

    def closed_neighborhood(self, subset: Iterable[int]) -> frozenset[int]:
        """Gamma^+ of a set: the set itself plus every neighbor."""
        out: set[int] = set()
        for i in subset:
            out.add(i)
            out.update(self._adj[i])
        return frozenset(out)

    def is_independent(self, subset: Iterable[int]) -> bool:
        items = list(subset)
        for a_pos, a in enumerate(items):
            for b in items[a_pos + 1:]:
                if a == b or b in self._adj[a]:
                    return False
        return True

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in sorted(self._adj[u]) if u < v]

    def adjacency_masks(self) -> list[int]:
        """Per-vertex neighbor bitmasks (vertex itself excluded)."""
        masks = []
        for i in range(self.n):
            m = 0
            for j in self._adj[i]:
                m |= 1 << j
            masks.append(m)
        return masks

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [[u, v] for u, v in self.edges()]}

    @classmethod
    def from_json(cls, obj: dict) -> "DependencyGraph":
        return cls(int(obj["n"]), [(int(u), int(v)) for u, v in obj.get("edges", [])])

    def __repr__(self) -> str:
        return f"DependencyGraph(n={self.n}, edges={self.edges()!r})"


class RuleGraph:
    """Dependency graph whose adjacency is computed by a rule.

    Used when the event set is too large for stored adjacency.  The rule
    is only consulted for distinct indices; irreflexivity is enforced
    here.
    """

    __slots__ = ("n", "_rule")

    def __init__(self, n: int, rule: Callable[[int, int], bool]) -> None:
        self.n = n
        self._rule = rule

    def adjacent(self, i: int, j: int) -> bool:
        return i != j and self._rule(i, j)

    def neighbors(self, i: int) -> frozenset[int]:
        # Linear scan; acceptable only at verification scale.
        return frozenset(j for j in range(self.n) if self.adjacent(i, j))

    def closed_neighborhood(self, subset: Iterable[int]) -> frozenset[int]:
        out: set[int] = set()
        for i in subset:
            out.add(i)
            out.update(self.neighbors(i))
        return frozenset(out)

    def is_independent(self, subset: Iterable[int]) -> bool:
        items = list(subset)
        for a_pos, a in enumerate(items):
            for b in items[a_pos + 1:]:
                if a == b or self.adjacent(a, b):
                    return False
        return True

    def adjacency_masks(self) -> list[int]:
        """Materialized neighbor bitmasks; quadratic in n, small graphs only."""
        masks = []
        for i in range(self.n):
            m = 0
            for j in range(self.n):
                if self.adjacent(i, j):
                    m |= 1 << j
            masks.append(m)
        return masks


def independent_set_masks(graph: DependencyGraph, cap: int = ENUMERATION_CAP) -> list[int]:
    """All independent sets as bitmasks, ascending by mask value.

    Refuses graphs with more than ``cap`` vertices; the output is
    exponential in n.
    """
    n = graph.n
    if n > cap:
        raise ValueError(f"independent-set enumeration refused for n={n} > cap={cap}")
    adj = graph.adjacency_masks()
    out: list[int] = []

    def extend(mask: int, start: int) -> None:
        out.append(mask)
        for v in range(start, n):
            if not (adj[v] & mask):
                extend(mask | (1 << v), v + 1)

    extend(0, 0)
    out.sort()
    return out


def enumerate_independent_sets(
    graph: DependencyGraph, cap: int = ENUMERATION_CAP
) -> list[frozenset[int]]:
    """All independent sets (including the empty set) in deterministic order.

    Order is ascending bitmask value, i.e. sets containing only low
    indices come first.
    """
    return [
        frozenset(i for i in range(graph.n) if mask >> i & 1)
        for mask in independent_set_masks(graph, cap)
    ]


@dataclass(frozen=True)
class StableSetSequence:
    """A sequence of independent sets (I_1, ..., I_t).

    The sequence is *valid* for a graph when every set is independent,
    every set after the first is contained in the closed neighborhood of
    its predecessor, and no nonempty set follows an empty one.  It is
    *proper* when additionally every set is nonempty.
    """

    sets: tuple[frozenset[int], ...]

    @classmethod
    def of(cls, *sets: Iterable[int]) -> "StableSetSequence":
        return cls(tuple(frozenset(s) for s in sets))

    @property
    def total_size(self) -> int:
        return sum(len(s) for s in self.sets)

    @property
    def is_proper(self) -> bool:
        return all(self.sets)

    def __len__(self) -> int:
        return len(self.sets)


def validate_sequence(graph, sequence) -> bool:
    """Check the stable-set-sequence conditions; False on any violation.

    Accepts a StableSetSequence or any iterable of index collections.
    Out-of-range indices also yield False.
    """
    sets = sequence.sets if isinstance(sequence, StableSetSequence) else [
        frozenset(s) for s in sequence
    ]
    seen_empty = False
    prev: frozenset[int] | None = None
    for current in sets:
        if any(not (0 <= i < graph.n) for i in current):
            return False
        if not graph.is_independent(current):
            return False
        if current and seen_empty:
            return False
        if not current:
            seen_empty = True
        if prev is not None and current and not current <= graph.closed_neighborhood(prev):
            return False
        prev = current
    return True
