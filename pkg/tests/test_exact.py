import random
from itertools import combinations

import pytest
from hypothesis import given, settings

from twwlab.core import (
    ContractionSequence,
    OrderedStructure,
    TwwError,
    all_ordered_graphs,
    intervals,
    ordered_clique,
    ordered_path,
    red_degree,
    types_count,
    verify_contraction_sequence,
)
from twwlab.exact import SimplicityWitness, is_kt_simple, simplicity, twinwidth_exact

from conftest import ordered_graphs, random_graph, structures

# frozen by brute force over every merge order (brute_twinwidth below)
P5_TWINWIDTH = 1


def brute_twinwidth(S):
    """Minimax over every merge order, no memoization."""
    def go(P, worst):
        if len(P) == 1:
            return worst
        best = None
        for i, j in combinations(range(len(P)), 2):
            Q = [B for k, B in enumerate(P) if k not in (i, j)] + [P[i] + P[j]]
            val = go(Q, max(worst, red_degree(S, Q)))
            best = val if best is None else min(best, val)
        return best
    return go([[i] for i in range(S.n)], 0)


def brute_simple(S, k, t):
    n = S.n
    for size in range(t, n + 1):
        for lc in combinations(range(1, n), size - 1):
            for rc in combinations(range(1, n), size - 1):
                if not any(types_count(S, L, R) <= k and types_count(S, R, L) <= k
                           for L in intervals(lc, n) for R in intervals(rc, n)):
                    return False
    return True


def test_small_examples():
    assert twinwidth_exact(ordered_path(1))[0] == 0
    assert twinwidth_exact(ordered_clique(4))[0] == 0
    assert brute_twinwidth(ordered_path(5)) == P5_TWINWIDTH
    d, seq = twinwidth_exact(ordered_path(5))
    assert d == P5_TWINWIDTH
    assert verify_contraction_sequence(ordered_path(5), seq) == d


def test_cap():
    with pytest.raises(TwwError):
        twinwidth_exact(ordered_path(11))
    assert twinwidth_exact(ordered_path(11), cap=11)[0] == 1


@settings(max_examples=40, deadline=None)
@given(structures(max_n=5))
def test_exact_matches_brute_force(S):
    d, seq = twinwidth_exact(S)
    assert verify_contraction_sequence(S, seq) == d
    assert d == brute_twinwidth(S)


def test_exact_is_a_lower_bound_for_random_sequences():
    rng = random.Random(7)
    for _ in range(30):
        S = random_graph(rng, 7)
        d, _ = twinwidth_exact(S)
        elems = list(range(7))
        merges = []
        while len(elems) > 1:
            a, b = rng.sample(elems, 2)
            merges.append((a, b))
            elems.remove(b)
        assert d <= verify_contraction_sequence(S, ContractionSequence(7, tuple(merges)))


def test_kt_simple_preconditions():
    with pytest.raises(TwwError):
        is_kt_simple(ordered_path(3), 1, 4)
    with pytest.raises(TwwError):
        is_kt_simple(ordered_path(3), 1, 0)


def test_one_part_needs_k_at_least_zone_complexity():
    S = ordered_path(4)
    need = max(types_count(S, range(4), range(4)), 1)
    assert is_kt_simple(S, need, 1) is True
    assert isinstance(is_kt_simple(S, need - 1, 1), SimplicityWitness)


def test_cliques_are_simple_from_two_parts():
    for n in range(2, 7):
        for t in range(2, n + 1):
            assert is_kt_simple(ordered_clique(n), 1, t) is True
    # a single zone V x V sees the diagonal in every row, so k = 1 is too small
    assert isinstance(is_kt_simple(ordered_clique(5), 1, 1), SimplicityWitness)
    assert simplicity(ordered_clique(5)) == 2
    assert simplicity(ordered_path(1)) == 1


def test_witness_zones_all_violate():
    S = OrderedStructure.graph(6, [(0, 3), (1, 4), (2, 5), (0, 5)])
    w = is_kt_simple(S, 1, 2)
    assert isinstance(w, SimplicityWitness)
    assert len(w.row_cuts) == len(w.col_cuts) == 1
    assert all(max(v) > 1 for v in w.per_zone.values())


def test_exactly_t_parts_agrees_with_all_sizes():
    for n in range(1, 6):
        for S in all_ordered_graphs(n):
            for k in (1, 2):
                for t in range(1, n + 1):
                    a = is_kt_simple(S, k, t) is True
                    assert a == (is_kt_simple(S, k, t, all_sizes=True) is True)


@settings(max_examples=60, deadline=None)
@given(structures(max_n=5))
def test_kt_simple_matches_definition(S):
    for k in (1, 2, 3):
        for t in range(1, min(S.n, 3) + 1):
            assert (is_kt_simple(S, k, t) is True) == brute_simple(S, k, t)


@given(ordered_graphs(max_n=6))
def test_simplicity_is_least(G):
    k = simplicity(G)
    assert is_kt_simple(G, k, k) is True
    if k > 1:
        assert is_kt_simple(G, k - 1, k - 1) is not True
