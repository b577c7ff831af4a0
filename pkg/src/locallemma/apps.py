"""Instance builders and end-to-end solvers for three coloring problems.

Given an edge-colored complete graph or a colored square matrix, the
builders set up engine-ready bundles whose events are exactly the
violations of the target structure:

  rainbow spanning trees   t trees, no repeated color inside a tree,
                           no edge shared between trees
  rainbow perfect matching no two matching edges of equal color
  disjoint transversals    t permutations, each hitting n distinct
                           colors, no shared cell

Each builder also returns cluster-criterion parameters (a uniform y
vector) under which the engine's resample count has explicit tail
bounds whenever the color multiplicity and the copy count stay below
the stated fraction of n.  Event sets reach the hundreds of thousands
at contest sizes, so dependency is evaluated by rule (shared space and
overlapping vertex support) rather than stored, and occurrence scans
exploit the structures directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .engine import RunLog, maximal_set_resample
from .graphs import RuleGraph
from .oracles import (
    PatternEvent,
    is_perfect_matching,
    is_spanning_tree,
    matching_pairs,
    matching_resample,
    normalize_edge,
    permutation_resample,
    sample_perfect_matching,
    sample_spanning_tree,
    tree_resample,
)
from .polynomials import CriterionParams, predicted_bound

#: Cluster-parameter constants: y = BETA * p for trees and transversals,
#: valid while multiplicity and copy count stay below GAMMA * n.
BETA = (8 / 7) ** 8
GAMMA_TREE = (1 / 32) * (7 / 8) ** 7
GAMMA_LATIN = 7**7 / 8**8
MATCHING_BETA = (4 / 3) ** 4


# ---------------------------------------------------------------------------
# colored inputs


class ColoredCompleteGraph:
    """Edge coloring of the complete graph on [n]."""

    def __init__(self, n: int, color: dict) -> None:
        self.n = n
        self.color = {normalize_edge(e): int(c) for e, c in color.items()}
        expected = n * (n - 1) // 2
        if len(self.color) != expected:
            raise ValueError(
                f"coloring covers {len(self.color)} edges, K_{n} has {expected}"
            )

    @property
    def multiplicity(self) -> int:
        counts: dict[int, int] = {}
        for c in self.color.values():
            counts[c] = counts.get(c, 0) + 1
        return max(counts.values(), default=0)

    def classes(self) -> dict[int, list[tuple[int, int]]]:
        out: dict[int, list[tuple[int, int]]] = {}
        for e in sorted(self.color):
            out.setdefault(self.color[e], []).append(e)
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "colors": [[u, v, self.color[(u, v)]] for u, v in sorted(self.color)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ColoredCompleteGraph":
        return cls(int(obj["n"]), {(int(u), int(v)): c for u, v, c in obj["colors"]})


class ColorMatrix:
    """Square matrix of color ids."""

    def __init__(self, rows: Sequence[Sequence[int]]) -> None:
        self.rows = tuple(tuple(int(c) for c in row) for row in rows)
        n = len(self.rows)
        if any(len(row) != n for row in self.rows):
            raise ValueError("color matrix must be square")

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def multiplicity(self) -> int:
        counts: dict[int, int] = {}
        for row in self.rows:
            for c in row:
                counts[c] = counts.get(c, 0) + 1
        return max(counts.values(), default=0)

    def to_json(self) -> dict:
        return {"matrix": [list(row) for row in self.rows]}

    @classmethod
    def from_json(cls, obj: dict) -> "ColorMatrix":
        return cls(obj["matrix"])


# ---------------------------------------------------------------------------
# generators


def _chunk_coloring(items: list, size: int) -> dict:
    return {item: k // size for k, item in enumerate(items)}


def random_edge_coloring(n: int, multiplicity: int, rng) -> ColoredCompleteGraph:
    """Random coloring of K_n with every color on at most `multiplicity` edges."""
    if multiplicity < 1:
        raise ValueError("multiplicity must be at least 1")
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    rng.shuffle(edges)
    return ColoredCompleteGraph(n, _chunk_coloring(edges, multiplicity))


def rainbow_edge_coloring(n: int) -> ColoredCompleteGraph:
    """Every edge its own color."""
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    return ColoredCompleteGraph(n, {e: k for k, e in enumerate(edges)})


def round_robin_coloring(n: int) -> ColoredCompleteGraph:
    """Proper coloring of K_n (n even): each color class a perfect matching.

    Classic circle construction: one vertex stays fixed while the others
    rotate, giving n-1 rounds that partition the edges.
    """
    if n % 2:
        raise ValueError("round-robin coloring needs even n")
    color: dict[tuple[int, int], int] = {}
    m = n - 1
    for r in range(m):
        color[normalize_edge((r, n - 1))] = r
        for k in range(1, n // 2):
            a = (r + k) % m
            b = (r - k) % m
            color[normalize_edge((a, b))] = r
    return ColoredCompleteGraph(n, color)


def random_color_matrix(n: int, multiplicity: int, rng) -> ColorMatrix:
    """Random n x n matrix with every color in at most `multiplicity` cells."""
    if multiplicity < 1:
        raise ValueError("multiplicity must be at least 1")
    cells = [(u, v) for u in range(n) for v in range(n)]
    rng.shuffle(cells)
    coloring = _chunk_coloring(cells, multiplicity)
    rows = [[0] * n for _ in range(n)]
    for (u, v), c in coloring.items():
        rows[u][v] = c
    return ColorMatrix(rows)


def distinct_color_matrix(n: int) -> ColorMatrix:
    return ColorMatrix([[u * n + v for v in range(n)] for u in range(n)])


# ---------------------------------------------------------------------------
# standalone validators (scan raw structures, not event predicates)


def validate_rainbow_matching(coloring: ColoredCompleteGraph, partner) -> bool:
    if len(partner) != coloring.n or not is_perfect_matching(partner):
        return False
    colors = [coloring.color[e] for e in matching_pairs(partner)]
    return len(colors) == len(set(colors))


def validate_rainbow_trees(coloring: ColoredCompleteGraph, trees: Sequence) -> bool:
    n = coloring.n
    seen: set[tuple[int, int]] = set()
    for tree in trees:
        edges = [normalize_edge(e) for e in tree]
        if not is_spanning_tree(n, edges):
            return False
        colors = [coloring.color[e] for e in edges]
        if len(colors) != len(set(colors)):
            return False
        for e in edges:
            if e in seen:
                return False
            seen.add(e)
    return True


def validate_disjoint_transversals(matrix: ColorMatrix, perms: Sequence) -> bool:
    n = matrix.n
    seen_cells: set[tuple[int, int]] = set()
    for pi in perms:
        if len(pi) != n or sorted(pi) != list(range(n)):
            return False
        colors = [matrix.rows[u][pi[u]] for u in range(n)]
        if len(set(colors)) != n:
            return False
        for u in range(n):
            cell = (u, pi[u])
            if cell in seen_cells:
                return False
            seen_cells.add(cell)
    return True


# ---------------------------------------------------------------------------
# application bundles


class _AppBundle:
    """Shared plumbing for the three builders' bundles.

    Subclasses fill the parallel event tables (kind, payload, spaces,
    support) plus index dictionaries for the occurrence scans.  The
    dependency rule is uniform: two events interfere when they involve
    a common space and their vertex supports intersect.
    """

    kind = ""

    def __init__(self) -> None:
        self.event_payload: list[tuple] = []
        self.event_spaces: list[frozenset[int]] = []
        self.event_support: list[frozenset[int]] = []
        self.graph = None

    def _finish_graph(self) -> None:
        spaces = self.event_spaces
        support = self.event_support

        def rule(a: int, b: int) -> bool:
            return bool(spaces[a] & spaces[b]) and bool(support[a] & support[b])

        self.graph = RuleGraph(len(self.event_payload), rule)

    @property
    def n(self) -> int:
        return len(self.event_payload)

    def state_key(self, state):
        return state


class RainbowTreeBundle(_AppBundle):
    """t independent uniform spanning trees of K_n with collision events.

    Type-1 events: two same-colored edges inside one tree.  Type-2
    events: one edge present in two trees.  Type-1 events are indexed
    first, each family in lexicographic order.
    """

    kind = "rainbow-tree"

    def __init__(self, coloring: ColoredCompleteGraph, t: int) -> None:
        super().__init__()
        if t < 1:
            raise ValueError("need at least one tree")
        self.coloring = coloring
        self.t = t
        n = coloring.n
        self.size = n

        self.t1_index: dict[tuple, int] = {}
        self.t2_index: dict[tuple, int] = {}
        classes = coloring.classes()
        pairs = [
            (e, f)
            for edges in classes.values()
            for a, e in enumerate(edges)
            for f in edges[a + 1:]
        ]
        pairs.sort()
        for i in range(t):
            for e, f in pairs:
                self.t1_index[(i, e, f)] = len(self.event_payload)
                self.event_payload.append((i, e, f))
                self.event_spaces.append(frozenset((i,)))
                self.event_support.append(frozenset(e) | frozenset(f))
        all_edges = sorted(coloring.color)
        for i in range(t):
            for j in range(i + 1, t):
                for e in all_edges:
                    self.t2_index[(i, j, e)] = len(self.event_payload)
                    self.event_payload.append((i, j, e))
                    self.event_spaces.append(frozenset((i, j)))
                    self.event_support.append(frozenset(e))
        self.n_type1 = len(self.t1_index)
        self._finish_graph()

    def event_prob(self, idx: int) -> float:
        n = self.size
        if idx < self.n_type1:
            _, e, f = self.event_payload[idx]
            return (3 if len(set(e) | set(f)) == 3 else 4) / n**2
        return 4 / n**2

    def params(self) -> CriterionParams:
        y = BETA * 4 / self.size**2
        return CriterionParams(kind="cll", y=(y,) * self.n)

    def clique_size_bounds(self) -> dict[str, int]:
        n, t, q = self.size, self.t, self.coloring.multiplicity
        return {"same-space": (n - 1) * (q - 1), "cross-space": (n - 1) * (t - 1)}

    def cluster_criterion_ok(self) -> bool:
        n, t, q = self.size, self.t, self.coloring.multiplicity
        y = BETA * 4 / n**2
        p = 4 / n**2
        return p * (1 + (n - 1) * (t - 1) * y) ** 4 * (1 + (n - 1) * (q - 1) * y) ** 4 <= y

    def sample(self, rng):
        return tuple(sample_spanning_tree(self.size, rng) for _ in range(self.t))

    def holds(self, idx: int, state) -> bool:
        payload = self.event_payload[idx]
        if idx < self.n_type1:
            i, e, f = payload
            return e in state[i] and f in state[i]
        i, j, e = payload
        return e in state[i] and e in state[j]

    def resample(self, idx: int, state, rng):
        payload = self.event_payload[idx]
        trees = list(state)
        if idx < self.n_type1:
            i, e, f = payload
            trees[i] = tree_resample(trees[i], (e, f), rng)
        else:
            i, j, e = payload
            trees[i] = tree_resample(trees[i], (e,), rng)
            trees[j] = tree_resample(trees[j], (e,), rng)
        return tuple(trees)

    def occurring(self, state) -> list[int]:
        out: list[int] = []
        color = self.coloring.color
        for i, tree in enumerate(state):
            by_color: dict[int, list] = {}
            for e in tree:
                by_color.setdefault(color[e], []).append(e)
            for edges in by_color.values():
                if len(edges) > 1:
                    edges.sort()
                    for a, e in enumerate(edges):
                        for f in edges[a + 1:]:
                            out.append(self.t1_index[(i, e, f)])
        for i in range(self.t):
            for j in range(i + 1, self.t):
                for e in state[i] & state[j]:
                    out.append(self.t2_index[(i, j, e)])
        return out

    def validate_solution(self, state) -> bool:
        return validate_rainbow_trees(self.coloring, state)

    def solution_json(self, state) -> dict:
        return {"trees": [[list(e) for e in sorted(tree)] for tree in state]}


class RainbowMatchingBundle(_AppBundle):
    """Uniform perfect matching of an edge-colored K_{2n}.

    One event per same-colored pair of vertex-disjoint edges; pairs
    sharing a vertex can never sit in a matching together and carry no
    event.  Events interfere whenever their vertex supports meet.
    """

    kind = "rainbow-matching"

    def __init__(self, coloring: ColoredCompleteGraph) -> None:
        super().__init__()
        if coloring.n % 2:
            raise ValueError("perfect matchings need an even vertex count")
        self.coloring = coloring
        self.size = coloring.n

        self.pair_index: dict[tuple, int] = {}
        pairs = []
        for edges in coloring.classes().values():
            for a, e in enumerate(edges):
                for f in edges[a + 1:]:
                    if not (set(e) & set(f)):
                        pairs.append((e, f))
        pairs.sort()
        for e, f in pairs:
            self.pair_index[(e, f)] = len(self.event_payload)
            self.event_payload.append((e, f))
            self.event_spaces.append(frozenset((0,)))
            self.event_support.append(frozenset(e) | frozenset(f))
        self._finish_graph()

    def event_prob(self, idx: int) -> float:
        m = self.size
        return 1 / ((m - 1) * (m - 3))

    def params(self) -> CriterionParams:
        y = MATCHING_BETA / ((self.size - 1) * (self.size - 3))
        return CriterionParams(kind="cll", y=(y,) * self.n)

    def clique_size_bounds(self) -> dict[str, int]:
        q = self.coloring.multiplicity
        return {"vertex": (q - 1) * (self.size - 1)}

    def cluster_criterion_ok(self) -> bool:
        m, q = self.size, self.coloring.multiplicity
        p = 1 / ((m - 1) * (m - 3))
        y = MATCHING_BETA * p
        return p * (1 + (q - 1) * (m - 1) * y) ** 4 <= y

    def sample(self, rng):
        return sample_perfect_matching(self.size, rng)

    def holds(self, idx: int, state) -> bool:
        e, f = self.event_payload[idx]
        return state[e[0]] == e[1] and state[f[0]] == f[1]

    def resample(self, idx: int, state, rng):
        return matching_resample(state, self.event_payload[idx], rng)

    def occurring(self, state) -> list[int]:
        color = self.coloring.color
        by_color: dict[int, list] = {}
        for e in matching_pairs(state):
            by_color.setdefault(color[e], []).append(e)
        out: list[int] = []
        for edges in by_color.values():
            if len(edges) > 1:
                for a, e in enumerate(edges):
                    for f in edges[a + 1:]:
                        out.append(self.pair_index[(e, f)])
        return out

    def validate_solution(self, state) -> bool:
        return validate_rainbow_matching(self.coloring, state)

    def solution_json(self, state) -> dict:
        return {"matching": [list(e) for e in matching_pairs(state)]}


class LatinBundle(_AppBundle):
    """t uniform permutations over a colored matrix, as transversals.

    Cells are edges of a complete bipartite graph: cell (u, v) touches
    row-node u and column-node n+v, and two cells intersect when they
    share a row or a column.  Type-1 events: one permutation picks two
    same-colored cells.  Type-2 events: two permutations pick the same
    cell.
    """

    kind = "latin"

    def __init__(self, matrix: ColorMatrix, t: int) -> None:
        super().__init__()
        if t < 1:
            raise ValueError("need at least one transversal")
        self.matrix = matrix
        self.t = t
        n = matrix.n
        self.size = n

        by_color: dict[int, list[tuple[int, int]]] = {}
        for u in range(n):
            for v in range(n):
                by_color.setdefault(matrix.rows[u][v], []).append((u, v))
        pairs = []
        for cells in by_color.values():
            for a, e in enumerate(cells):
                for f in cells[a + 1:]:
                    if e[0] != f[0] and e[1] != f[1]:
                        pairs.append((e, f))
        pairs.sort()

        self.t1_index: dict[tuple, int] = {}
        self.t2_index: dict[tuple, int] = {}
        for i in range(t):
            for e, f in pairs:
                self.t1_index[(i, e, f)] = len(self.event_payload)
                self.event_payload.append((i, e, f))
                self.event_spaces.append(frozenset((i,)))
                self.event_support.append(frozenset((e[0], n + e[1], f[0], n + f[1])))
        for i in range(t):
            for j in range(i + 1, t):
                for u in range(n):
                    for v in range(n):
                        e = (u, v)
                        self.t2_index[(i, j, e)] = len(self.event_payload)
                        self.event_payload.append((i, j, e))
                        self.event_spaces.append(frozenset((i, j)))
                        self.event_support.append(frozenset((u, n + v)))
        self.n_type1 = len(self.t1_index)
        self._finish_graph()

    def event_prob(self, idx: int):
        n = self.size
        if idx < self.n_type1:
            return 1 / (n * (n - 1))
        return 1 / n**2

    def params(self) -> CriterionParams:
        y = BETA / (self.size * (self.size - 1))
        return CriterionParams(kind="cll", y=(y,) * self.n)

    def clique_size_bounds(self) -> dict[str, int]:
        n, t, q = self.size, self.t, self.matrix.multiplicity
        return {"same-space": n * (q - 1), "cross-space": n * (t - 1)}

    def cluster_criterion_ok(self) -> bool:
        n, t, q = self.size, self.t, self.matrix.multiplicity
        p = 1 / (n * (n - 1))
        y = BETA * p
        return p * (1 + n * (t - 1) * y) ** 4 * (1 + n * (q - 1) * y) ** 4 <= y

    def sample(self, rng):
        out = []
        for _ in range(self.t):
            pi = list(range(self.size))
            rng.shuffle(pi)
            out.append(tuple(pi))
        return tuple(out)

    def holds(self, idx: int, state) -> bool:
        payload = self.event_payload[idx]
        if idx < self.n_type1:
            i, e, f = payload
            return state[i][e[0]] == e[1] and state[i][f[0]] == f[1]
        i, j, (u, v) = payload
        return state[i][u] == v and state[j][u] == v

    def resample(self, idx: int, state, rng):
        payload = self.event_payload[idx]
        perms = list(state)
        if idx < self.n_type1:
            i, e, f = payload
            perms[i] = permutation_resample(perms[i], PatternEvent((e, f)), rng)
        else:
            i, j, e = payload
            pattern = PatternEvent((e,))
            perms[i] = permutation_resample(perms[i], pattern, rng)
            perms[j] = permutation_resample(perms[j], pattern, rng)
        return tuple(perms)

    def occurring(self, state) -> list[int]:
        out: list[int] = []
        rows = self.matrix.rows
        n = self.size
        for i, pi in enumerate(state):
            by_color: dict[int, list[tuple[int, int]]] = {}
            for u in range(n):
                cell = (u, pi[u])
                by_color.setdefault(rows[u][pi[u]], []).append(cell)
            for cells in by_color.values():
                if len(cells) > 1:
                    for a, e in enumerate(cells):
                        for f in cells[a + 1:]:
                            out.append(self.t1_index[(i, e, f)])
        for i in range(self.t):
            for j in range(i + 1, self.t):
                pa, pb = state[i], state[j]
                for u in range(n):
                    if pa[u] == pb[u]:
                        out.append(self.t2_index[(i, j, (u, pa[u]))])
        return out

    def validate_solution(self, state) -> bool:
        return validate_disjoint_transversals(self.matrix, state)

    def solution_json(self, state) -> dict:
        return {"transversals": [list(pi) for pi in state]}


# ---------------------------------------------------------------------------
# builders


def build_rainbow_tree_instance(coloring: ColoredCompleteGraph, t: int):
    """Bundle plus cluster parameters for t edge-disjoint rainbow trees."""
    bundle = RainbowTreeBundle(coloring, t)
    return bundle, bundle.params()


def build_rainbow_matching_instance(coloring: ColoredCompleteGraph):
    """Bundle plus cluster parameters for one rainbow perfect matching."""
    bundle = RainbowMatchingBundle(coloring)
    return bundle, bundle.params()


def build_latin_instance(matrix: ColorMatrix, t: int):
    """Bundle plus cluster parameters for t pairwise disjoint transversals."""
    bundle = LatinBundle(matrix, t)
    return bundle, bundle.params()


# ---------------------------------------------------------------------------
# solver


@dataclass
class SolutionReport:
    """Engine outcome with validation verdict and bound comparison."""

    kind: str
    seed: int
    budget: int
    terminated: bool
    validated: bool
    total_resamples: int
    predicted_bounds: dict[str, float]
    solution: dict
    log: RunLog

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "budget": self.budget,
            "terminated": self.terminated,
            "validated": self.validated,
            "total_resamples": self.total_resamples,
            "predicted_bounds": self.predicted_bounds,
            "solution": self.solution,
            "log": self.log.to_json(),
        }


def solve(bundle, params: CriterionParams, seed: int = 0,
          budget: int = 1_000_000) -> SolutionReport:
    """Run the engine on a built instance and validate its output.

    Validation re-derives the target property from the raw structures
    (colors scanned directly), independent of the event predicates.
    The report carries tail bounds at t = 1 and t = ln 10^4 next to the
    observed resample count; the observed count is the ground truth,
    the bounds are the theory's prediction.
    """
    state, log = maximal_set_resample(bundle, seed, budget)
    validated = bool(log.terminated and bundle.validate_solution(state))
    bounds = {
        "t=1": predicted_bound(params, 1.0),
        "t=ln(1e4)": predicted_bound(params, math.log(1e4)),
    }
    return SolutionReport(
        kind=bundle.kind,
        seed=seed,
        budget=budget,
        terminated=log.terminated,
        validated=validated,
        total_resamples=log.total_resamples,
        predicted_bounds=bounds,
        solution=bundle.solution_json(state),
        log=log,
    )
