"""Brute-force oracles for desk-scale instances."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import combinations

from twwlab.core import (
    ContractionSequence,
    OrderedStructure,
    Partition,
    TwwError,
    _block_constant,
    intervals,
)

DEFAULT_CAP = 10


def twinwidth_exact(S: OrderedStructure, cap: int = DEFAULT_CAP) -> tuple[int, ContractionSequence]:
    """Exact twin-width with an optimal contraction sequence.

    Best-first search over partitions, where the cost of a path is the largest
    red-degree met along it; the first time the one-block partition is popped
    its cost is optimal.
    """
    n = S.n
    if n > cap:
        raise TwwError(f"instance has {n} elements, over the cap of {cap}")
    if n <= 1:
        return 0, ContractionSequence(n)
    M = S.code_matrix
    homog: dict[tuple[tuple[int, ...], tuple[int, ...]], bool] = {}

    def red(P: Partition) -> int:
        deg = [0] * len(P)
        for i, j in combinations(range(len(P)), 2):
            key = (P[i], P[j])
            h = homog.get(key)
            if h is None:
                h = homog[key] = _block_constant(M, P[i], P[j])
            if not h:
                deg[i] += 1
                deg[j] += 1
        return max(deg, default=0)

    start: Partition = tuple((i,) for i in range(n))
    best = {start: 0}
    parent: dict[Partition, tuple[Partition, tuple[int, int]]] = {}
    heap = [(0, start)]
    while heap:
        cost, P = heapq.heappop(heap)
        if cost > best[P]:
            continue
        if len(P) == 1:
            merges = []
            while P in parent:
                P, m = parent[P]
                merges.append(m)
            return cost, ContractionSequence(n, tuple(reversed(merges)))
        for i, j in combinations(range(len(P)), 2):
            merged = tuple(sorted(P[i] + P[j]))
            Q = tuple(sorted(P[:i] + P[i + 1:j] + P[j + 1:] + (merged,)))
            c = max(cost, red(Q))
            if c < best.get(Q, n + 1):
                best[Q] = c
                parent[Q] = (P, (P[i][0], P[j][0]))
                heapq.heappush(heap, (c, Q))
    raise AssertionError("one-block partition unreachable")


@dataclass(frozen=True)
class SimplicityWitness:
    """Pair of convex partitions in which no zone has few types both ways.

    ``per_zone[(i, j)]`` is ``(types(L_i/R_j), types(R_j/L_i))``.
    """
    row_cuts: tuple[int, ...]
    col_cuts: tuple[int, ...]
    per_zone: dict


def _zone_table(S: OrderedStructure) -> dict[tuple[int, int, int, int], tuple[int, int]]:
    # (l0, l1, r0, r1) -> (types(L/R), types(R/L)) for all interval pairs
    M = S.code_matrix
    n = S.n
    table = {}
    for l0 in range(n):
        for l1 in range(l0 + 1, n + 1):
            for r0 in range(n):
                for r1 in range(r0 + 1, n + 1):
                    rows = {M[a][r0:r1] for a in range(l0, l1)}
                    cols = {tuple(M[b][l0:l1]) for b in range(r0, r1)}
                    table[l0, l1, r0, r1] = (len(rows), len(cols))
    return table


def is_kt_simple(S: OrderedStructure, k: int, t: int, all_sizes: bool = False,
                 _table=None) -> bool | SimplicityWitness:
    """``True`` if ``S`` is (k,t)-simple, else a violating pair of partitions.

    Zone complexity only grows when parts are merged, so a violating pair with
    more than ``t`` parts coarsens to one with exactly ``t`` parts; checking
    size ``t`` is therefore enough. ``all_sizes`` checks every size anyway.
    """
    n = S.n
    if t < 1:
        raise TwwError("t must be at least 1")
    if t > n:
        raise TwwError(f"t={t} exceeds the domain size {n}")
    table = _table if _table is not None else _zone_table(S)
    for size in range(t, n + 1) if all_sizes else (t,):
        cut_sets = list(combinations(range(1, n), size - 1))
        for lc in cut_sets:
            L = intervals(lc, n)
            for rc in cut_sets:
                R = intervals(rc, n)
                if not any(max(table[l.start, l.stop, r.start, r.stop]) <= k
                           for l in L for r in R):
                    zones = {(i, j): table[l.start, l.stop, r.start, r.stop]
                             for i, l in enumerate(L) for j, r in enumerate(R)}
                    return SimplicityWitness(lc, rc, zones)
    return True


def simplicity(S: OrderedStructure) -> int:
    """Least k such that ``S`` is (k,k)-simple."""
    if S.n < 1:
        raise TwwError("simplicity needs a nonempty structure")
    table = _zone_table(S)
    for k in range(1, S.n + 1):
        if is_kt_simple(S, k, k, _table=table) is True:
            return k
    raise AssertionError("singleton partitions always give a simple zone")


def find_semigrid(S: OrderedStructure, m: int):
    """Lexicographically least embedding of a regular m x m semigrid, or None.

    Returns ``(scheme, embedding)``.
    """
    from twwlab import semigrid

    size = (m + 1) * (m + 1)
    if size > S.n:
        return None
    if S.is_graph():
        from twwlab.core import embeddings
        found = None
        seen = {}
        for scheme in semigrid.enumerate_schemes(S.sig):
            G = semigrid.generate_semigrid(scheme, m, m)
            if G in seen:
                continue
            seen[G] = scheme
            emb = next(embeddings(G, S), None)
            if emb is not None and (found is None or emb < found[1]):
                found = (scheme, emb)
        return found
    for emb in combinations(range(S.n), size):
        got = semigrid.classify_regular_semigrid(S.induced(emb))
        if got is not None and got[1] == got[2] == m:
            return got[0], emb
    return None


def max_semigrid(S: OrderedStructure, cap: int = 3) -> int:
    """Largest m <= cap such that some regular m x m semigrid is induced in S."""
    for m in range(cap, 0, -1):
        if find_semigrid(S, m) is not None:
            return m
    return 0
