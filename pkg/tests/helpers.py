"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive: direct alternating sums, a
determinant-based tree count, and a literal transcription of the
resampling loop that rescans every event after every resample.  Slow
but obviously correct.
"""

import random
from fractions import Fraction
from itertools import combinations


def subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from combinations(items, r)


def brute_breve(graph, p, subset):
    """Alternating sum over independent subsets of `subset`, by definition."""
    total = 0.0 if not isinstance(p[0] if p else 0, Fraction) else Fraction(0)
    for combo in subsets(subset):
        if graph.is_independent(combo):
            term = 1 if not combo else None
            if term is None:
                term = 1
                for i in combo:
                    term = term * p[i]
            total += (-1) ** len(combo) * term
    return total


def brute_q(graph, p, ind_set):
    """p^I times the alternating sum outside the closed neighborhood."""
    closed = set(graph.closed_neighborhood(ind_set))
    rest = [v for v in range(graph.n) if v not in closed]
    coeff = 1
    for i in ind_set:
        coeff = coeff * p[i]
    return coeff * brute_breve(graph, p, rest)


def kirchhoff_tree_count(n, edges):
    """Spanning tree count of a multigraph via the matrix-tree determinant.

    Exact rational Gaussian elimination on one cofactor of the
    Laplacian; edges may repeat.
    """
    lap = [[Fraction(0)] * n for _ in range(n)]
    for u, v in edges:
        lap[u][u] += 1
        lap[v][v] += 1
        lap[u][v] -= 1
        lap[v][u] -= 1
    m = [row[1:] for row in lap[1:]]
    size = n - 1
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, size):
            factor = m[r][col] * inv
            if factor:
                for c in range(col, size):
                    m[r][c] -= factor * m[col][c]
    assert det.denominator == 1
    return int(det)


class _Fork(Exception):
    """Raised when a replayed path runs out of prerecorded choices."""

    def __init__(self, probs):
        self.probs = probs


class _IntervalDraw:
    """Stands in for one uniform draw; branches lazily on comparisons.

    Successive `< t` checks against the same draw condition on the
    interval the previous answers pinned down, so cumulative-threshold
    scans get exact conditional probabilities.  Scaling by a constant
    is tracked symbolically so `rng.random() * total` works.
    """

    def __init__(self, rng):
        self.rng = rng
        self.lo = Fraction(0)
        self.hi = Fraction(1)
        self.scale = Fraction(1)

    def __mul__(self, other):
        self.scale *= Fraction(other)
        return self

    __rmul__ = __mul__

    def __lt__(self, t):
        ft = Fraction(t) / self.scale
        if ft <= self.lo:
            return False
        if ft >= self.hi:
            return True
        width = self.hi - self.lo
        below = self.rng._choose([(ft - self.lo) / width, (self.hi - ft) / width])
        if below == 0:
            self.hi = ft
            return True
        self.lo = ft
        return False


class ReplayRNG:
    """random.Random look-alike that replays a fixed branch path."""

    def __init__(self, path):
        self.path = path
        self.i = 0

    def _choose(self, probs):
        if self.i == len(self.path):
            raise _Fork(probs)
        k = self.path[self.i]
        self.i += 1
        return k

    def randrange(self, n):
        return self._choose([Fraction(1, n)] * n)

    def getrandbits(self, bits):
        n = 1 << bits
        return self._choose([Fraction(1, n)] * n)

    def random(self):
        return _IntervalDraw(self)


def exact_outcomes(fn):
    """Exact output law of fn(rng) by exhausting every RNG branch.

    Only usable when fn consumes boundedly many draws on every path
    (no rejection or random-walk loops).
    """
    results = {}
    stack = [((), Fraction(1))]
    while stack:
        path, prob = stack.pop()
        try:
            res = fn(ReplayRNG(path))
        except _Fork as fork:
            for k, pk in enumerate(fork.probs):
                if pk > 0:
                    stack.append((path + (k,), prob * pk))
        else:
            results[res] = results.get(res, Fraction(0)) + prob
    return results


def reference_resample_run(bundle, seed=0, max_resamples=1_000_000):
    """Literal resampling loop: rescan all events before every pick."""
    rng = random.Random(seed)
    state = bundle.sample(rng)
    iterations = []
    total = 0
    while True:
        picked = []
        while True:
            chosen = None
            for i in range(bundle.n):
                blocked = any(
                    i == j or bundle.graph.adjacent(i, j) for j in picked
                )
                if not blocked and bundle.holds(i, state):
                    chosen = i
                    break
            if chosen is None:
                break
            if total >= max_resamples:
                iterations.append(picked)
                return state, iterations, total, False
            state = bundle.resample(chosen, state, rng)
            total += 1
            picked.append(chosen)
        iterations.append(picked)
        if not picked:
            return state, iterations, total, True
