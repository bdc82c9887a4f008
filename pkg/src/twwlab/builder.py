"""Greedy convex chains, refinement and the approximation loop for twin-width.

Works on the adjacency-type matrix of a structure (or any rectangular matrix
for the chain itself). Failure of the greedy chain is turned into a mixed
minor through a grid minor of the bad-column matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from twwlab.core import (
    ContractionSequence,
    ConvexPartition,
    OrderedStructure,
    Partition,
    TwwError,
    canonical_partition,
    verify_contraction_sequence,
)
from twwlab.minors import (
    MixedMinorWitness,
    TypeMatrix,
    _mixed_zone,
    bad_columns,
    find_grid_minor,
    mt_threshold,
    validate_mixed_witness,
)

DEFAULT_C_CEILING = 1 << 20


@dataclass
class BuildParams:
    """Thresholds for the greedy chain.

    ``b`` bounds the exceptional parts and ``c`` the distinct rows outside
    them. Defaults follow the constants 2*c_{tk} and k**c_{tk}, with ``c``
    capped at ``c_ceiling``.
    """
    k: int
    t: int
    b: int | None = None
    c: int | None = None
    mt_profile: str = "exp8"
    c_ceiling: int = DEFAULT_C_CEILING

    def __post_init__(self):
        if self.k < 1 or self.t < 1:
            raise TwwError("k and t must be at least 1")
        ct = mt_threshold(self.t * self.k, self.mt_profile)
        if self.b is None:
            self.b = 2 * ct
        if self.c is None:
            if self.k == 1:
                self.c = 1
            elif ct * math.log2(self.k) >= math.log2(self.c_ceiling):
                self.c = self.c_ceiling
            else:
                self.c = min(self.k ** ct, self.c_ceiling)
        if self.b < 0 or self.c < 1:
            raise TwwError("thresholds must be b >= 0 and c >= 1")


@dataclass(frozen=True)
class ChainStep:
    side: str  # "rows" or "cols"
    merged: int  # index of the left part of the merged pair
    part: tuple[int, int]  # merged interval, half-open
    exceptional: tuple[int, ...]  # indices of parts on the other side
    distinct: int  # distinct rows (or columns) outside the exceptional parts
    b: int
    c: int


@dataclass
class ConvexPairChain:
    k: int
    pairs: list[tuple[ConvexPartition, ConvexPartition]]
    log: list[ChainStep] = field(default_factory=list)
    relaxations: list[tuple[int, int, int]] = field(default_factory=list)  # (step, b, c)

    @property
    def length(self) -> int:
        return len(self.pairs) - 1


def _entries(S) -> tuple[tuple, ...]:
    if isinstance(S, OrderedStructure):
        return S.code_matrix
    return TypeMatrix.of(S).entries


def _cuts(parts: list[range]) -> tuple[int, ...]:
    return tuple(p.start for p in parts[1:])


class _Side:
    """One side of the chain: parts of this side against parts of the other."""

    def __init__(self, A, k: int):
        self.A = A
        self.k = k
        self._bad: dict[tuple[int, int], frozenset[int]] = {}

    def bad(self, R: range) -> frozenset[int]:
        key = (R.start, R.stop)
        got = self._bad.get(key)
        if got is None:
            got = self._bad[key] = frozenset(bad_columns(self.A, R, self.k))
        return got

    def exceptional(self, R: range, other: list[range]) -> tuple[tuple[int, ...], int]:
        bad = self.bad(R)
        B = tuple(i for i, C in enumerate(other) if not bad.isdisjoint(C))
        skip = set(B)
        keep = [c for i, C in enumerate(other) if i not in skip for c in C]
        distinct = len({tuple(self.A[r][c] for c in keep) for r in R})
        return B, distinct


def _witness_from_grid(A, groups: list[range], other: list[range], grid, k: int, t: int,
                       n_rows: int, n_cols: int) -> MixedMinorWitness:
    pick = [k * x - 1 for x in range(1, t)]
    rc = tuple(groups[grid.row_cuts[i]].start for i in pick)
    cc = tuple(other[grid.col_cuts[i]].start for i in pick)
    rb = [0, *rc, n_rows]
    cb = [0, *cc, n_cols]
    zones = tuple(_mixed_zone(A, range(rb[i], rb[i + 1]), range(cb[j], cb[j + 1]), k)
                  for i in range(t) for j in range(t))
    return MixedMinorWitness(k, t, rc, cc, zones)


def build_convex_chain(S, params: BuildParams) -> ConvexPairChain | MixedMinorWitness:
    """Greedy chain of convex partition pairs, or a (k,t)-mixed minor when blocked."""
    E = _entries(S)
    m = len(E)
    n = len(E[0]) if E else 0
    if m == 0 or n == 0:
        raise TwwError("matrix must be nonempty")
    k, t = params.k, params.t
    ET = tuple(zip(*E))
    sides = {"rows": _Side(E, k), "cols": _Side(ET, k)}
    rows = [range(i, i + 1) for i in range(m)]
    cols = [range(j, j + 1) for j in range(n)]
    b, c = params.b, params.c
    chain = ConvexPairChain(k, [(ConvexPartition(m, _cuts(rows)), ConvexPartition(n, _cuts(cols)))])
    while len(rows) > 1 or len(cols) > 1:
        name = "rows" if len(rows) >= len(cols) else "cols"
        mine, other = (rows, cols) if name == "rows" else (cols, rows)
        side = sides[name]
        while True:
            best = None
            for j in range(len(mine) - 1):
                R = range(mine[j].start, mine[j + 1].stop)
                B, d = side.exceptional(R, other)
                if len(B) <= b and d <= c:
                    key = (len(B), d, j)
                    if best is None or key < best[0]:
                        best = (key, B)
            if best is not None:
                break
            groups = [range(mine[j].start, mine[min(j + 1, len(mine) - 1)].stop)
                      for j in range(0, len(mine), 2)]
            if t * k <= min(len(groups), len(other)):
                N = [[int(not side.bad(G).isdisjoint(C)) for C in other] for G in groups]
                grid = find_grid_minor(N, t * k)
                if grid is not None:
                    sizes = (m, n) if name == "rows" else (n, m)
                    w = _witness_from_grid(side.A, groups, other, grid, k, t, *sizes)
                    if name == "cols":
                        w = w.transpose()
                    if not validate_mixed_witness(E, w):
                        raise TwwError("internal error: extracted mixed minor does not validate")
                    return w
            nb, nc = min(2 * b + 1, len(other)), min(2 * c, max(m, n))
            if (nb, nc) == (b, c) or (nb <= b and nc <= c):
                raise TwwError("internal error: thresholds cannot be relaxed further")
            b, c = max(b, nb), max(c, nc)
            chain.relaxations.append((len(chain.log), b, c))
        (_, d, j), B = best
        merged = range(mine[j].start, mine[j + 1].stop)
        mine[j:j + 2] = [merged]
        chain.log.append(ChainStep(name, j, (merged.start, merged.stop), B, d, b, c))
        chain.pairs.append((ConvexPartition(m, _cuts(rows)), ConvexPartition(n, _cuts(cols))))
    return chain


def _classes(A, R: range, keep: list[int]) -> list[tuple[int, ...]]:
    groups: dict[tuple, list[int]] = {}
    for r in R:
        groups.setdefault(tuple(A[r][c] for c in keep), []).append(r)
    return [tuple(g) for g in groups.values()]


def refine_chain(S, chain: ConvexPairChain, params: BuildParams | None = None
                 ) -> list[tuple[Partition, Partition]]:
    """Split every convex part by its pattern outside the exceptional parts."""
    if not isinstance(chain, ConvexPairChain) or len(chain.log) != len(chain.pairs) - 1:
        raise TwwError("chain bookkeeping is missing or inconsistent")
    E = _entries(S)
    k = params.k if params is not None else chain.k
    ET = tuple(zip(*E))
    sides = (_Side(E, k), _Side(ET, k))
    out = []
    for rp, cp in chain.pairs:
        rows, cols = rp.blocks(), cp.blocks()
        refined = []
        for side, mine, other in ((sides[0], rows, cols), (sides[1], cols, rows)):
            blocks = []
            for R in mine:
                B, _ = side.exceptional(R, other)
                skip = set(B)
                keep = [c for i, C in enumerate(other) if i not in skip for c in C]
                blocks.extend(_classes(side.A, R, keep))
            refined.append(canonical_partition(blocks))
        out.append((refined[0], refined[1]))
    return out


def _meet(P: Partition, Q: Partition) -> Partition:
    where = {}
    for i, blk in enumerate(Q):
        for x in blk:
            where[x] = i
    parts: dict[tuple[int, int], list[int]] = {}
    for i, blk in enumerate(P):
        for x in blk:
            parts.setdefault((i, where[x]), []).append(x)
    return canonical_partition(parts.values())


def contraction_from_chain(S, refined: list[tuple[Partition, Partition]]) -> ContractionSequence:
    """One contraction sequence of the domain from refined row/column partition pairs.

    Each pair is replaced by its common refinement; the chain is made nested
    by intersecting with all later partitions, and every coarsening jump is
    interpolated by single merges, smallest elements first.
    """
    if not refined:
        raise TwwError("empty chain")
    n = sum(len(b) for b in refined[0][0])
    if any(sum(len(b) for b in C) != n for _, C in refined) or any(
            sum(len(b) for b in R) != n for R, _ in refined):
        raise TwwError("row and column partitions must cover the same domain")
    if isinstance(S, OrderedStructure) and S.n != n:
        raise TwwError("chain and structure sizes differ")
    Q = [_meet(R, C) for R, C in refined]
    for i in range(len(Q) - 2, -1, -1):
        Q[i] = _meet(Q[i], Q[i + 1])
    if n and len(Q[-1]) != 1:
        # the last pair is one convex part per side, but refining it may split it
        Q.append((tuple(range(n)),))
    Q.insert(0, canonical_partition([x] for x in range(n)))
    merges = []
    for fine, coarse in zip(Q, Q[1:]):
        where = {}
        for blk in fine:
            where[blk[0]] = blk
        for big in coarse:  # sorted by smallest element
            reps = sorted(x for x in big if x in where)
            for r in reps[1:]:
                merges.append((reps[0], r))
    return ContractionSequence(n, tuple(merges))


def algo_cor(S: OrderedStructure, k: int, t: int, params: BuildParams | None = None
             ) -> ContractionSequence | MixedMinorWitness:
    """Contraction sequence of S, or a (k,t)-mixed minor of its type matrix."""
    if S.n <= 1:
        return ContractionSequence(S.n)
    params = params or BuildParams(k, t)
    if (params.k, params.t) != (k, t):
        raise TwwError("params disagree with k, t")
    chain = build_convex_chain(S, params)
    if isinstance(chain, MixedMinorWitness):
        return chain
    return contraction_from_chain(S, refine_chain(S, chain, params))


@dataclass(frozen=True)
class ApproxResult:
    k_used: int
    red_degree: int
    sequence: ContractionSequence

    def __iter__(self):
        return iter((self.k_used, self.red_degree, self.sequence))


def approx_twinwidth(S: OrderedStructure, mt_profile: str = "exp8",
                     c_ceiling: int = DEFAULT_C_CEILING) -> ApproxResult:
    """Smallest k with algo_cor(S, k, k) succeeding, and its verified red-degree."""
    for k in range(1, max(S.n, 1) + 1):
        out = algo_cor(S, k, k, BuildParams(k, k, mt_profile=mt_profile, c_ceiling=c_ceiling))
        if isinstance(out, ContractionSequence):
            return ApproxResult(k, verify_contraction_sequence(S, out), out)
    raise TwwError("internal error: no k up to n succeeded")
