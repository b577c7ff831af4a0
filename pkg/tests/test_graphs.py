"""Dependency graph structure and stable set sequence rules."""

import random

import pytest
from hypothesis import given, strategies as st

from locallemma.graphs import (
    DependencyGraph,
    RuleGraph,
    StableSetSequence,
    enumerate_independent_sets,
    independent_set_masks,
    validate_sequence,
)


def path(n):
    g = DependencyGraph(n)
    for i in range(n - 1):
        g.add_edge(i, i + 1)
    return g


def test_basic_adjacency():
    g = path(3)
    assert g.adjacent(0, 1) and g.adjacent(1, 2)
    assert not g.adjacent(0, 2)
    assert g.neighbors(1) == frozenset({0, 2})
    assert g.closed_neighborhood([0]) == frozenset({0, 1})


def test_no_self_loops_and_range_checks():
    g = DependencyGraph(3)
    with pytest.raises(ValueError):
        g.add_edge(1, 1)
    with pytest.raises(ValueError):
        g.add_edge(0, 3)


def test_path3_independent_sets():
    # {} {0} {1} {2} {0,2}: five sets, by hand
    sets = enumerate_independent_sets(path(3))
    assert len(sets) == 5
    assert frozenset({0, 2}) in sets
    assert frozenset({0, 1}) not in sets


def test_cycle5_independent_set_count():
    g = DependencyGraph(5)
    for i in range(5):
        g.add_edge(i, (i + 1) % 5)
    # empty set + 5 singletons + 5 non-adjacent pairs
    assert len(enumerate_independent_sets(g)) == 11


def test_masks_sorted_ascending():
    masks = independent_set_masks(path(4))
    assert masks == sorted(masks)
    assert masks[0] == 0


def test_empty_graph_all_subsets_independent():
    g = DependencyGraph(3)
    assert len(enumerate_independent_sets(g)) == 8


def test_rule_graph_matches_explicit():
    rng = random.Random(17)
    for _ in range(20):
        n = rng.randrange(1, 8)
        g = DependencyGraph(n)
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < 0.4:
                    g.add_edge(u, v)
        rg = RuleGraph(n, g.adjacent)
        for u in range(n):
            assert rg.neighbors(u) == g.neighbors(u)
            for v in range(n):
                assert rg.adjacent(u, v) == g.adjacent(u, v)
        for _ in range(10):
            s = [v for v in range(n) if rng.random() < 0.5]
            assert rg.is_independent(s) == g.is_independent(s)


def test_rule_graph_never_self_adjacent():
    rg = RuleGraph(4, lambda a, b: True)
    assert not rg.adjacent(2, 2)


def test_json_round_trip():
    g = path(4)
    g2 = DependencyGraph.from_json(g.to_json())
    assert g2.n == 4
    assert all(g2.adjacent(u, v) == g.adjacent(u, v)
               for u in range(4) for v in range(4))


def test_sequence_validation():
    g = path(3)
    ok = StableSetSequence.of({0, 2}, {1})
    assert validate_sequence(g, ok)
    assert ok.is_proper and ok.total_size == 3

    # second set must sit inside the closed neighborhood of the first
    bad = StableSetSequence.of({0}, {2})
    assert not validate_sequence(g, bad)

    # dependent sets are rejected
    assert not validate_sequence(g, StableSetSequence.of({0, 1}))

    # a nonempty set after an empty one is malformed
    assert not validate_sequence(g, StableSetSequence.of({0}, set(), {0}))
    assert validate_sequence(g, StableSetSequence.of({0}, set()))
    assert not StableSetSequence.of({0}, set()).is_proper


def test_empty_sequence_is_valid_and_proper():
    seq = StableSetSequence.of()
    assert validate_sequence(path(2), seq)
    assert seq.is_proper
    assert seq.total_size == 0


@given(st.integers(0, 6), st.integers(0, 2**15 - 1), st.integers(0, 10**6))
def test_independence_agrees_with_mask_list(n, edge_bits, subset_seed):
    g = DependencyGraph(n)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    for k, (u, v) in enumerate(pairs):
        if (edge_bits >> k) & 1:
            g.add_edge(u, v)
    masks = set(independent_set_masks(g))
    rng = random.Random(subset_seed)
    mask = rng.randrange(1 << n) if n else 0
    subset = [i for i in range(n) if (mask >> i) & 1]
    assert (mask in masks) == g.is_independent(subset)
