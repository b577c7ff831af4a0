"""Oracle synthesis on explicitly enumerated probability spaces.

A finite space lists every state with its exact probability, the states
belonging to each event, and a dependency graph over the events.  For
an event i, a resampling oracle is a stochastic kernel from states
satisfying E_i (weighted by the conditioned measure) back to the whole
space that (a) reproduces the unconditioned measure exactly and
(b) never moves from a state where a non-neighbor event fails to one
where it holds.

Such a kernel exists exactly when a transportation problem is feasible:
ship the conditioned mass of each source state u to target states w
whose satisfied non-neighbor events are a subset of u's.  Feasibility
is decided by exact-rational max-flow; infeasibility yields a Hall-type
certificate, a set of source states whose conditioned mass exceeds the
total mass of every target they may reach.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .graphs import DependencyGraph
from .oracles import OracleEventError

#: Refuse transportation instances beyond this many states.
SYNTH_STATE_CAP = 4096


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class ExplicitSpace:
    """Finite probability space with events given by state lists."""

    probs: tuple[Fraction, ...]
    events: tuple[frozenset[int], ...]
    graph: DependencyGraph

    def __post_init__(self) -> None:
        probs = tuple(_as_fraction(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "events", tuple(frozenset(e) for e in self.events))
        if any(p < 0 for p in probs):
            raise ValueError("state probabilities must be nonnegative")
        total = sum(probs)
        if abs(total - 1) > Fraction(1, 10**12):
            raise ValueError(f"state probabilities sum to {total}, not 1")
        if len(self.events) != self.graph.n:
            raise ValueError("event count must match the dependency graph")
        k = len(probs)
        for ev in self.events:
            if any(not (0 <= s < k) for s in ev):
                raise ValueError("event references an unknown state")

    @property
    def n_states(self) -> int:
        return len(self.probs)

    @property
    def n_events(self) -> int:
        return len(self.events)

    def event_prob(self, i: int) -> Fraction:
        return sum((self.probs[s] for s in self.events[i]), Fraction(0))

    def holds(self, i: int, state: int) -> bool:
        return state in self.events[i]

    def to_json(self) -> dict:
        return {
            "states": self.n_states,
            "prob": [str(p) for p in self.probs],
            "events": [sorted(e) for e in self.events],
            "graph": self.graph.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExplicitSpace":
        probs = tuple(_as_fraction(p) for p in obj["prob"])
        if len(probs) != int(obj["states"]):
            raise ValueError("state count does not match probability list")
        events = tuple(frozenset(int(s) for s in ev) for ev in obj["events"])
        return cls(probs, events, DependencyGraph.from_json(obj["graph"]))


@dataclass(frozen=True)
class SynthesizedOracle:
    """Exact resampling kernel for one event of an explicit space.

    rows maps each positive-probability state of the event to its
    outgoing distribution, a tuple of (target state, Fraction mass)
    with masses summing to one.
    """

    event: int
    rows: dict[int, tuple[tuple[int, Fraction], ...]]

    def support(self, u: int) -> list[int]:
        return [w for w, _ in self.rows[u]]

    def to_json(self) -> dict:
        return {
            "event": self.event,
            "rows": {
                str(u): [[w, str(f)] for w, f in row] for u, row in self.rows.items()
            },
        }


@dataclass(frozen=True)
class HallCertificate:
    """Witness of infeasibility: conditioned mass exceeds reachable mass."""

    event: int
    states: tuple[int, ...]
    source_mass: Fraction
    reachable_mass: Fraction


def _free_events(space: ExplicitSpace, i: int) -> list[int]:
    g = space.graph
    return [j for j in range(space.n_events) if j != i and not g.adjacent(i, j)]


def _signature(space: ExplicitSpace, free: Sequence[int], state: int) -> frozenset[int]:
    return frozenset(j for j in free if state in space.events[j])


class _FlowNetwork:
    """Edmonds-Karp max flow with exact Fraction capacities."""

    def __init__(self, n: int) -> None:
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[Fraction] = []

    def add(self, u: int, v: int, cap: Fraction) -> None:
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(Fraction(0))

    def max_flow(self, s: int, t: int) -> Fraction:
        total = Fraction(0)
        while True:
            prev_edge = [-1] * len(self.adj)
            prev_edge[s] = -2
            queue = deque([s])
            while queue and prev_edge[t] == -1:
                u = queue.popleft()
                for eid in self.adj[u]:
                    v = self.to[eid]
                    if prev_edge[v] == -1 and self.cap[eid] > 0:
                        prev_edge[v] = eid
                        queue.append(v)
            if prev_edge[t] == -1:
                return total
            bottleneck = None
            v = t
            while v != s:
                eid = prev_edge[v]
                bottleneck = self.cap[eid] if bottleneck is None else min(bottleneck, self.cap[eid])
                v = self.to[eid ^ 1]
            v = t
            while v != s:
                eid = prev_edge[v]
                self.cap[eid] -= bottleneck
                self.cap[eid ^ 1] += bottleneck
                v = self.to[eid ^ 1]
            total += bottleneck

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for eid in self.adj[u]:
                v = self.to[eid]
                if v not in seen and self.cap[eid] > 0:
                    seen.add(v)
                    queue.append(v)
        return seen


def synthesize(space: ExplicitSpace, i: int):
    """Build an exact resampling oracle for event i, or a Hall certificate.

    Source u (a positive-probability state of E_i, mass mu(u)/Pr[E_i])
    may ship to target w (any positive-probability state, mass mu(w))
    when u satisfies every non-neighbor event that w satisfies.  The
    kernel exists iff the max flow saturates, and then row u is the
    flow out of u normalized by its source mass.
    """
    if space.n_states > SYNTH_STATE_CAP:
        raise ValueError(f"synthesis refused beyond {SYNTH_STATE_CAP} states")
    if not (0 <= i < space.n_events):
        raise ValueError(f"no event {i}")
    pe = space.event_prob(i)
    if pe == 0:
        raise ValueError(f"event {i} has probability zero")
    free = _free_events(space, i)
    sources = [u for u in sorted(space.events[i]) if space.probs[u] > 0]
    targets = [w for w in range(space.n_states) if space.probs[w] > 0]
    if not free:
        # every transportation edge is allowed, so ship from each source
        # proportionally: the kernel just draws a fresh state
        fresh = tuple((w, space.probs[w]) for w in targets)
        return SynthesizedOracle(event=i, rows={u: fresh for u in sources})
    sig_u = {u: _signature(space, free, u) for u in sources}
    sig_w = {w: _signature(space, free, w) for w in targets}

    source_id = {u: 2 + k for k, u in enumerate(sources)}
    target_id = {w: 2 + len(sources) + k for k, w in enumerate(targets)}
    net = _FlowNetwork(2 + len(sources) + len(targets))
    for u in sources:
        net.add(0, source_id[u], space.probs[u] / pe)
    for w in targets:
        net.add(target_id[w], 1, space.probs[w])
    allowed: dict[int, list[int]] = {}
    for u in sources:
        row = [w for w in targets if sig_w[w] <= sig_u[u]]
        allowed[u] = row
        for w in row:
            net.add(source_id[u], target_id[w], Fraction(2))

    value = net.max_flow(0, 1)
    if value != 1:
        cut = net.reachable(0)
        blocked = tuple(u for u in sources if source_id[u] in cut)
        reach = {w for u in blocked for w in allowed[u]}
        return HallCertificate(
            event=i,
            states=blocked,
            source_mass=sum((space.probs[u] for u in blocked), Fraction(0)) / pe,
            reachable_mass=sum((space.probs[w] for w in reach), Fraction(0)),
        )

    rows: dict[int, tuple[tuple[int, Fraction], ...]] = {}
    for u in sources:
        mass = space.probs[u] / pe
        row = []
        for eid in net.adj[source_id[u]]:
            v = net.to[eid]
            # flow on a forward edge equals the residual on its twin
            if v != 0 and eid % 2 == 0 and net.cap[eid ^ 1] > 0:
                w = targets[v - 2 - len(sources)]
                row.append((w, net.cap[eid ^ 1] / mass))
        row.sort()
        rows[u] = tuple(row)
    return SynthesizedOracle(event=i, rows=rows)


def check_lopsided_association(space: ExplicitSpace, i: int) -> bool:
    """Does an exact resampling oracle for event i exist?"""
    return isinstance(synthesize(space, i), SynthesizedOracle)


def check_lopsidependency(space: ExplicitSpace, i: int, cap: int = 20) -> bool:
    """Negative-association inequality for every non-neighbor subset.

    For each J disjoint from the closed neighborhood of i with
    Pr[no event of J] > 0, checks
    Pr[E_i and no event of J] <= Pr[E_i] * Pr[no event of J], exactly.
    """
    free = _free_events(space, i)
    if len(free) > cap:
        raise ValueError("too many non-neighbor events to enumerate")
    pe = space.event_prob(i)
    for mask in range(1 << len(free)):
        chosen = [free[k] for k in range(len(free)) if mask >> k & 1]
        none_mass = Fraction(0)
        joint_mass = Fraction(0)
        for s in range(space.n_states):
            if space.probs[s] == 0:
                continue
            if any(s in space.events[j] for j in chosen):
                continue
            none_mass += space.probs[s]
            if s in space.events[i]:
                joint_mass += space.probs[s]
        if none_mass > 0 and joint_mass > pe * none_mass:
            return False
    return True


class ExplicitBundle:
    """Engine-ready bundle over an explicit space with synthesized oracles.

    States are plain integers.  Construction synthesizes every event's
    kernel up front and raises with the certificate when one does not
    exist.
    """

    def __init__(self, space: ExplicitSpace) -> None:
        self.space = space
        self.graph = space.graph
        self.kernels: list[SynthesizedOracle] = []
        for i in range(space.n_events):
            result = synthesize(space, i)
            if isinstance(result, HallCertificate):
                raise ValueError(
                    f"event {i} admits no resampling oracle: states {result.states} "
                    f"carry mass {result.source_mass} but reach only {result.reachable_mass}"
                )
            self.kernels.append(result)
        self._cum = []
        acc = 0.0
        for p in space.probs:
            acc += float(p)
            self._cum.append(acc)
        self._row_cum: dict[tuple[int, int], tuple[list[float], list[int]]] = {}
        for i, kernel in enumerate(self.kernels):
            for u, row in kernel.rows.items():
                cum, states = [], []
                acc = 0.0
                for w, f in row:
                    acc += float(f)
                    cum.append(acc)
                    states.append(w)
                self._row_cum[(i, u)] = (cum, states)

    @property
    def n(self) -> int:
        return self.space.n_events

    def sample(self, rng) -> int:
        r = rng.random()
        for s, acc in enumerate(self._cum):
            if r < acc:
                return s
        return len(self._cum) - 1

    def holds(self, i: int, state: int) -> bool:
        return state in self.space.events[i]

    def resample(self, i: int, state: int, rng) -> int:
        row = self._row_cum.get((i, state))
        if row is None:
            raise OracleEventError(f"event {i} does not hold in state {state}")
        cum, states = row
        r = rng.random()
        for k, acc in enumerate(cum):
            if r < acc:
                return states[k]
        return states[-1]

    def state_key(self, state: int) -> int:
        return state

    def exact_distribution(self) -> dict[int, float]:
        return {s: float(p) for s, p in enumerate(self.space.probs) if p > 0}
