"""The maximal-set resampling engine.

Each iteration greedily builds an independent set of occurring events:
repeatedly take the minimum-index event that occurs and is not blocked
by the closed neighborhood of the events already picked this iteration,
and resample it.  The run ends when an iteration picks nothing.

The engine works against any object satisfying the bundle interface::

    bundle.n                       number of events
    bundle.graph                   has adjacent(i, j)
    bundle.sample(rng)             fresh state from the product measure
    bundle.holds(i, state)         does event i occur in state
    bundle.resample(i, state, rng) resampling oracle for event i
    bundle.occurring(state)        optional: indices of occurring events

Oracles are assumed to satisfy the two resampling-oracle properties
(conditioned resampling restores the measure; non-neighbors cannot be
made to occur).  Under the second property, no event outside the closed
neighborhood of the picks can start occurring mid-iteration, so the
candidate pool computed at the top of an iteration only ever shrinks;
the engine exploits that instead of rescanning every event after each
resample.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .graphs import StableSetSequence

DEFAULT_MAX_RESAMPLES = 1_000_000


@dataclass
class RunLog:
    """Complete record of one engine run.

    iterations holds the picked event indices per iteration, in pick
    order (ascending); the final empty list is included when the run
    terminated.  total_resamples equals the sum of iteration sizes.
    terminated is False when the resample budget ran out, in which case
    the last iteration is partial.
    """

    seed: int
    iterations: list[list[int]]
    total_resamples: int
    terminated: bool

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "iterations": [list(it) for it in self.iterations],
            "total_resamples": self.total_resamples,
            "terminated": self.terminated,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RunLog":
        return cls(
            seed=int(obj["seed"]),
            iterations=[[int(i) for i in it] for it in obj["iterations"]],
            total_resamples=int(obj["total_resamples"]),
            terminated=bool(obj["terminated"]),
        )


def maximal_set_resample(bundle, seed: int = 0,
                         max_resamples: int = DEFAULT_MAX_RESAMPLES):
    """Run the engine to completion or budget exhaustion.

    A single random.Random(seed) is threaded through every sample and
    resample call in program order, so identical (bundle, seed,
    max_resamples) reproduce the run exactly.  Returns (state, RunLog).
    """
    if max_resamples <= 0:
        raise ValueError("resample budget must be positive")
    rng = random.Random(seed)
    holds = bundle.holds
    resample = bundle.resample
    adjacent = bundle.graph.adjacent
    occurring = getattr(bundle, "occurring", None)

    state = bundle.sample(rng)
    iterations: list[list[int]] = []
    total = 0
    while True:
        if occurring is not None:
            candidates = sorted(occurring(state))
        else:
            candidates = [i for i in range(bundle.n) if holds(i, state)]
        picked: list[int] = []
        while candidates:
            i = candidates[0]
            if total >= max_resamples:
                iterations.append(picked)
                return state, RunLog(seed, iterations, total, False)
            state = resample(i, state, rng)
            total += 1
            picked.append(i)
            candidates = [
                j for j in candidates[1:]
                if not adjacent(i, j) and holds(j, state)
            ]
        iterations.append(picked)
        if not picked:
            return state, RunLog(seed, iterations, total, True)


def log_follows(log: RunLog, sequence) -> bool:
    """Did the run resample exactly this stable set sequence at its start?

    True when iterations 1..t-1 of the log equal the first t-1 sets of
    the sequence and the t-th set is a prefix of iteration t (picks are
    in ascending index order, so prefix comparison is well defined).
    The empty sequence is followed by every run.
    """
    sets = sequence.sets if isinstance(sequence, StableSetSequence) else tuple(
        frozenset(s) for s in sequence
    )
    if not sets:
        return True
    if len(sets) > len(log.iterations):
        return False
    for pos in range(len(sets) - 1):
        if frozenset(log.iterations[pos]) != sets[pos]:
            return False
    last = sets[-1]
    tail = log.iterations[len(sets) - 1]
    if len(last) > len(tail):
        return False
    return frozenset(tail[: len(last)]) == last
