"""Statistical and exhaustive verification of resampling oracles.

test_r1 checks the measure-restoration property: sample states, keep
those satisfying the event (the conditioned measure), resample once,
and compare the empirical output distribution against the exact
unconditioned measure with a chi-square test.  test_r2 checks the
containment property: resampling an event must never switch on a
non-neighbor event that was off.

The module also ships an adversarial bundle (appendix_a_bundle) whose
isolated event E' gets resampled many iterations in a row with constant
probability: each E' resampling shifts a queue of bits into E's own
trigger variable, and the queue was loaded by earlier resamplings of
other events.  It demonstrates that per-run resampling counts cannot be
bounded through per-occurrence arguments in this framework.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from scipy.stats import chi2

from .engine import maximal_set_resample
from .graphs import RuleGraph
from .oracles import OracleEventError

DEFAULT_SIGNIFICANCE = 1e-6
DEFAULT_REJECTION_BUDGET = 10**8


def derive_seed(master: int, index: int) -> int:
    """Stable per-trial seed stream, independent of process hashing."""
    digest = hashlib.blake2b(
        f"{master}:{index}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


@dataclass
class DistributionTestReport:
    """Outcome of one chi-square comparison against an exact law."""

    event: int
    samples: int
    support_size: int
    chi_square: float
    threshold: float
    significance: float
    max_abs_deviation: float
    unexpected_states: int
    passed: bool

    def to_json(self) -> dict:
        return {
            "event": self.event,
            "samples": self.samples,
            "support_size": self.support_size,
            "chi_square": self.chi_square,
            "threshold": self.threshold,
            "significance": self.significance,
            "max_abs_deviation": self.max_abs_deviation,
            "unexpected_states": self.unexpected_states,
            "passed": self.passed,
        }


def _conditioned_state(bundle, event: int, rng, budget: int):
    """Sample from the measure conditioned on the event, by rejection."""
    for _ in range(budget):
        state = bundle.sample(rng)
        if bundle.holds(event, state):
            return state
    raise RuntimeError(
        f"rejection sampling failed to hit event {event} within {budget} draws"
    )


def test_r1(bundle, event: int, samples: int, seed: int = 0,
            significance: float = DEFAULT_SIGNIFICANCE,
            rejection_budget: int = DEFAULT_REJECTION_BUDGET) -> DistributionTestReport:
    """Measure-restoration check for one event.

    Draws `samples` states from the conditioned measure (rejection),
    resamples each once, and chi-square-tests the outputs against
    bundle.exact_distribution().  Passing means the statistic stays
    below the upper quantile at the given significance and no output
    fell outside the exact support.
    """
    exact = bundle.exact_distribution()
    key = getattr(bundle, "state_key", None)
    rng = random.Random(seed)
    counts: dict[object, int] = {}
    remaining_rejections = rejection_budget
    for _ in range(samples):
        state = _conditioned_state(bundle, event, rng, remaining_rejections)
        out = bundle.resample(event, state, rng)
        k = key(out) if key is not None else out
        counts[k] = counts.get(k, 0) + 1

    unexpected = sum(c for k, c in counts.items() if k not in exact)
    stat = 0.0
    max_dev = 0.0
    for k, prob in exact.items():
        expected = prob * samples
        observed = counts.get(k, 0)
        if expected > 0:
            stat += (observed - expected) ** 2 / expected
        max_dev = max(max_dev, abs(observed / samples - prob))
    df = max(len(exact) - 1, 1)
    threshold = float(chi2.ppf(1 - significance, df))
    return DistributionTestReport(
        event=event,
        samples=samples,
        support_size=len(exact),
        chi_square=stat,
        threshold=threshold,
        significance=significance,
        max_abs_deviation=max_dev,
        unexpected_states=unexpected,
        passed=(unexpected == 0 and stat < threshold),
    )


def test_r2(bundle, event: int, trials: int, seed: int = 0,
            rejection_budget: int = DEFAULT_REJECTION_BUDGET) -> int:
    """Containment check: count violations over conditioned trials.

    Each trial draws a state satisfying the event, records which
    non-neighbor events fail, resamples, and counts any of those that
    now hold.  A correct oracle yields exactly zero.
    """
    g = bundle.graph
    others = [
        j for j in range(bundle.n)
        if j != event and not g.adjacent(event, j)
    ]
    rng = random.Random(seed)
    violations = 0
    for _ in range(trials):
        state = _conditioned_state(bundle, event, rng, rejection_budget)
        off = [j for j in others if not bundle.holds(j, state)]
        after = bundle.resample(event, state, rng)
        violations += sum(1 for j in off if bundle.holds(j, after))
    return violations


def exhaustive_r2(bundle, event: int) -> int:
    """Zero-randomness containment check over every kernel support edge.

    Only for bundles exposing synthesized kernels (explicit spaces):
    walks each source state and each target in its kernel row and
    counts support edges that switch on an off non-neighbor event.
    """
    kernels = getattr(bundle, "kernels", None)
    if kernels is None:
        raise ValueError("exhaustive check needs a bundle with explicit kernels")
    g = bundle.graph
    others = [
        j for j in range(bundle.n)
        if j != event and not g.adjacent(event, j)
    ]
    violations = 0
    for u, row in kernels[event].rows.items():
        off = [j for j in others if not bundle.holds(j, u)]
        for w, _ in row:
            violations += sum(1 for j in off if bundle.holds(j, w))
    return violations


# ---------------------------------------------------------------------------
# the adversarial streak construction


class AppendixABundle:
    """Fair-bit bundle engineered for long consecutive resampling streaks.

    Variables, all independent fair bits: X_1..X_k, Y_i^j for j <= l,
    Z_1..Z_k, and W.  Events: E_i = {X_i = 0}, E_i^j = {Y_i^j = 0},
    E' = {W = 1}.  The graph makes each cluster {E_i, E_i^1..E_i^l} a
    clique; E' is isolated.  Oracles:

        E_i   : redraw X_i
        E_i^j : (X_i, Y_i^j, Z_i) <- (Z_i, fresh, X_i)
        E'    : W <- Z_1, queue shift Z_i <- Z_{i+1}, Z_k <- fresh

    Each oracle touches only variables of its own cluster, so both
    contract properties hold, yet resampling E' keeps reloading W from
    the Z-queue that earlier iterations filled with ones.  The clique
    serializes each cluster to one resample per iteration, so E_i^j
    only ever fires while X_i = 1 and its swap writes a one into the
    queue; two swaps in one iteration would cancel instead.  Event
    order: E_1..E_k, then the E_i^j, then E' last.
    """

    def __init__(self, k: int, l: int) -> None:
        if k < 1 or l < 1:
            raise ValueError("need at least one cluster and one queue feeder")
        self.k = k
        self.l = l
        self.y_offset = k          # state layout: X | Y | Z | W
        self.z_offset = k + k * l
        self.w_slot = k + k * l + k
        self.n_vars = self.w_slot + 1
        self.eprime = k + k * l    # event index of E'
        self.graph = RuleGraph(self.eprime + 1, self._rule)

    def _rule(self, a: int, b: int) -> bool:
        if a >= self.eprime or b >= self.eprime:
            return False
        ca = a if a < self.k else (a - self.k) // self.l
        cb = b if b < self.k else (b - self.k) // self.l
        return ca == cb

    @property
    def n(self) -> int:
        return self.eprime + 1

    def sample(self, rng) -> tuple[int, ...]:
        return tuple(rng.getrandbits(1) for _ in range(self.n_vars))

    def holds(self, i: int, state) -> bool:
        if i < self.k:
            return state[i] == 0
        if i < self.eprime:
            return state[self.y_offset + (i - self.k)] == 0
        return state[self.w_slot] == 1

    def occurring(self, state) -> list[int]:
        k, l = self.k, self.l
        out = [i for i in range(k) if state[i] == 0]
        yo = self.y_offset
        out.extend(k + j for j in range(k * l) if state[yo + j] == 0)
        if state[self.w_slot] == 1:
            out.append(self.eprime)
        return out

    def resample(self, i: int, state, rng) -> tuple[int, ...]:
        if not self.holds(i, state):
            raise OracleEventError(f"event {i} does not hold")
        vals = list(state)
        if i < self.k:
            vals[i] = rng.getrandbits(1)
        elif i < self.eprime:
            cluster, slot = divmod(i - self.k, self.l)
            zi = self.z_offset + cluster
            x = vals[cluster]
            vals[cluster] = vals[zi]
            vals[self.y_offset + (i - self.k)] = rng.getrandbits(1)
            vals[zi] = x
        else:
            zo = self.z_offset
            vals[self.w_slot] = vals[zo]
            for t in range(self.k - 1):
                vals[zo + t] = vals[zo + t + 1]
            vals[zo + self.k - 1] = rng.getrandbits(1)
        return tuple(vals)

    def state_key(self, state):
        return state

    def exact_distribution(self) -> dict:
        if self.n_vars > 20:
            raise ValueError("exact enumeration refused beyond 20 variables")
        out = {}
        pr = 1 / (1 << self.n_vars)
        for code in range(1 << self.n_vars):
            out[tuple(code >> t & 1 for t in range(self.n_vars))] = pr
        return out


def appendix_a_bundle(k: int, l: int) -> AppendixABundle:
    """Construct the streak bundle with k clusters and l feeders each."""
    return AppendixABundle(k, l)


@dataclass
class StreakReport:
    """Empirical distribution of the longest consecutive E'-resample run."""

    runs: int
    counts: dict[int, int]
    budget_exhausted: int

    def frequency_at_least(self, length: int) -> float:
        hits = sum(c for streak, c in self.counts.items() if streak >= length)
        return hits / self.runs

    def to_json(self) -> dict:
        return {
            "runs": self.runs,
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "budget_exhausted": self.budget_exhausted,
        }


def longest_streak(iterations, event: int) -> int:
    """Longest run of consecutive iterations that resampled the event."""
    best = 0
    current = 0
    for it in iterations:
        if event in it:
            current += 1
            best = max(best, current)
        else:
            current = 0
    return best


def measure_consecutive_runs(bundle: AppendixABundle, runs: int, seed: int = 0,
                             max_resamples: int = 1_000_000) -> StreakReport:
    """Run the engine repeatedly and histogram the E'-streak lengths."""
    counts: dict[int, int] = {}
    exhausted = 0
    for r in range(runs):
        _, log = maximal_set_resample(bundle, derive_seed(seed, r), max_resamples)
        if not log.terminated:
            exhausted += 1
        streak = longest_streak(log.iterations, bundle.eprime)
        counts[streak] = counts.get(streak, 0) + 1
    return StreakReport(runs=runs, counts=counts, budget_exhausted=exhausted)
