"""Counting ordered structures in hereditary classes and the factorial-growth families."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterator, Sequence

from twwlab.core import GRAPH, OrderedStructure, Signature, TwwError
from twwlab.semigrid import Scheme, generate_GS, generate_semigrid, semigrid_layout


@dataclass
class ForbiddenSet:
    patterns: list[OrderedStructure] = field(default_factory=list)
    sig: Signature = GRAPH

    def __post_init__(self):
        for P in self.patterns:
            if P.n == 0:
                raise TwwError("forbidden patterns must be nonempty")
            if P.sig != self.sig:
                raise TwwError("all patterns must share one signature")


@dataclass(frozen=True)
class GrowthRow:
    n: int
    count: int
    elapsed: float  # seconds


# Each element gets a self code (unary bits and loops) and each pair x < y a
# pair code (relation bits in both directions). Two structures on the same
# domain are equal iff these codes agree.

def _self_code(S: OrderedStructure, x: int) -> int:
    bits = [S.holds(u, x) for u in S.sig.unary] + [S.holds(r, x, x) for r in S.sig.binary]
    return sum(int(b) << i for i, b in enumerate(bits))


def _pair_code(S: OrderedStructure, x: int, y: int) -> int:
    if S.sig == GRAPH:
        return int(S.holds("E", x, y))
    bits = [S.holds(r, x, y) for r in S.sig.binary] + [S.holds(r, y, x) for r in S.sig.binary]
    return sum(int(b) << i for i, b in enumerate(bits))


def _options(sig: Signature) -> tuple[list[int], list[int]]:
    if sig == GRAPH:
        return [0], [0, 1]
    nb, nu = len(sig.binary), len(sig.unary)
    return list(range(2 ** (nu + nb))), list(range(4 ** nb))


def _encode(P: OrderedStructure) -> tuple[list[int], list[list[int]]]:
    selfs = [_self_code(P, x) for x in range(P.n)]
    pairs = [[_pair_code(P, x, y) for x in range(y)] for y in range(P.n)]
    return selfs, pairs


def _decode(sig: Signature, selfs: list[int], pairs: list[list[int]]) -> OrderedStructure:
    n = len(selfs)
    if sig == GRAPH:
        return OrderedStructure.graph(n, [(y, x) for x in range(n) for y in range(x) if pairs[x][y]])
    nb, nu = len(sig.binary), len(sig.unary)
    rels = {r: [[0] * n for _ in range(n)] for r in sig.binary}
    sets = {u: [0] * n for u in sig.unary}
    for x in range(n):
        for i, u in enumerate(sig.unary):
            sets[u][x] = (selfs[x] >> i) & 1
        for i, r in enumerate(sig.binary):
            rels[r][x][x] = (selfs[x] >> (nu + i)) & 1
        for y in range(x):
            code = pairs[x][y]
            for i, r in enumerate(sig.binary):
                rels[r][y][x] = (code >> i) & 1
                rels[r][x][y] = (code >> (nb + i)) & 1
    return OrderedStructure.build(sig, n, rels, sets)


def _ends_with_pattern(selfs, pairs, pat) -> bool:
    """Is there an embedding of pat whose last element is the last element of the host?"""
    ps, pp = pat
    p = len(ps)
    v = len(selfs) - 1
    if p > v + 1 or selfs[v] != ps[-1]:
        return False
    image = [0] * p
    image[p - 1] = v

    def extend(i: int, start: int) -> bool:
        if i == p - 1:
            return True
        for h in range(start, v - (p - 2 - i)):
            if selfs[h] != ps[i] or pairs[v][h] != pp[p - 1][i]:
                continue
            if any(pairs[h][image[j]] != pp[i][j] for j in range(i)):
                continue
            image[i] = h
            if extend(i + 1, h + 1):
                return True
        return False

    return extend(0, 0)


def iter_avoiding(F: ForbiddenSet, n: int, budget: int | None = None) -> Iterator[OrderedStructure]:
    """Ordered structures on 0..n-1 with no pattern of F as an induced substructure.

    Depth-first over elements, pruning a prefix as soon as it contains a
    pattern (which then must end at its newest element).
    """
    for item in _search(F, n, budget, stream=True):
        yield item


def enumerate_avoiding(F: ForbiddenSet, n: int, budget: int | None = None) -> int:
    """Number of ordered structures on 0..n-1 avoiding every pattern of F.

    Ordered structures are rigid, so this is also the count up to isomorphism.
    ``budget`` caps the number of search nodes; exceeding it raises and no
    partial count is returned.
    """
    total = 0
    for item in _search(F, n, budget, stream=False):
        total += item
    return total


def _search(F: ForbiddenSet, n: int, budget: int | None, stream: bool):
    if n < 0:
        raise TwwError("n must be nonnegative")
    pats = [_encode(P) for P in F.patterns]
    self_opts, pair_opts = _options(F.sig)
    selfs: list[int] = []
    pairs: list[list[int]] = []
    nodes = 0

    def rec(v: int):
        nonlocal nodes
        if v == n:
            yield _decode(F.sig, selfs, pairs) if stream else 1
            return
        for s in self_opts:
            for row in product(pair_opts, repeat=v):
                nodes += 1
                if budget is not None and nodes > budget:
                    raise TwwError(f"enumeration budget of {budget} nodes exceeded")
                selfs.append(s)
                pairs.append(list(row))
                if not any(_ends_with_pattern(selfs, pairs, pat) for pat in pats):
                    yield from rec(v + 1)
                selfs.pop()
                pairs.pop()

    yield from rec(0)


def growth_table(F: ForbiddenSet, n_max: int, budget: int | None = None) -> list[GrowthRow]:
    rows = []
    for n in range(n_max + 1):
        t0 = time.perf_counter()
        count = enumerate_avoiding(F, n, budget)
        rows.append(GrowthRow(n, count, time.perf_counter() - t0))
    return rows


def growth_lb(n: int) -> tuple[int, int, int]:
    """(k!, k**k, C(k*k, k)) for k = n // 3."""
    if n < 0:
        raise TwwError("n must be nonnegative")
    k = n // 3
    return math.factorial(k), k ** k, math.comb(k * k, k)


def growth_conjecture_sum(n: int) -> int:
    """Sum over k = 0..ceil(n/2) of C(n, 2k) * k!."""
    if n < 0:
        raise TwwError("n must be nonnegative")
    return sum(math.comb(n, 2 * k) * math.factorial(k) for k in range((n + 1) // 2 + 1))


def _check_perm(pi: Sequence[int]) -> tuple[int, ...]:
    pi = tuple(pi)
    if sorted(pi) != list(range(1, len(pi) + 1)):
        raise TwwError(f"{pi} is not a permutation of 1..{len(pi)}")
    return pi


def generate_Hpi(pi: Sequence[int]) -> OrderedStructure:
    """H(pi) on 2n vertices: vertex i is matched with vertex pi(i) + n (1-based)."""
    pi = _check_perm(pi)
    n = len(pi)
    return OrderedStructure.graph(2 * n, [(i - 1, pi[i - 1] + n - 1) for i in range(1, n + 1)])


EQ_SCHEME = Scheme("=", "<", False)


def build_Gpi(pi: Sequence[int], scheme: Scheme = EQ_SCHEME) -> OrderedStructure:
    """Substructure of the n x n '='-semigrid on the column representatives
    (0, j) and one cell per column, chosen so the result equals H(pi).

    With I_0 first the cells are (pi(j), j); with I_0 last the order is read
    backwards and the cells are mirrored accordingly.

    Needs an independent I_0 and no diagonal directions, since otherwise the
    chosen cells see each other or the representatives are adjacent.
    """
    pi = _check_perm(pi)
    if scheme.rtype != "=":
        raise TwwError("scheme unavailable: H(pi) is read off a semigrid of type '='")
    if scheme.clique or scheme.dirs & {"downright", "downleft"}:
        raise TwwError("scheme unavailable: needs independent I_0 and no diagonal directions")
    n = len(pi)
    G = generate_semigrid(scheme, n, n)
    pos = {p: k for k, p in enumerate(semigrid_layout(scheme, n, n))}
    if scheme.orient == "<":
        row = {j: pi[j - 1] for j in range(1, n + 1)}
    else:
        # read in reverse order, where column j comes (n + 1 - j)-th and row i (n + 1 - i)-th
        row = {j: n + 1 - pi[n - j] for j in range(1, n + 1)}
    keep = [pos[0, j] for j in range(1, n + 1)] + [pos[row[j], j] for j in range(1, n + 1)]
    H = G.induced(sorted(keep))
    if scheme.orient == ">":
        H = H.relabel(list(range(H.n - 1, -1, -1)))
    return H


def count_GS_family(k: int, scheme: Scheme = EQ_SCHEME) -> int:
    """Number of pairwise distinct G^S over all k x k permutation matrices S.

    Each G^S has 3k + 1 elements (the corner, k column and k row
    representatives, and k cells). A collision raises.
    """
    if not 1 <= k <= 5:
        raise TwwError("k must be between 1 and 5")
    seen = {}
    for pi in permutations(range(1, k + 1)):
        G = generate_GS(scheme, k, k, {(i, pi[i - 1]) for i in range(1, k + 1)})
        if G in seen:
            raise TwwError(f"permutations {seen[G]} and {pi} give the same structure")
        seen[G] = pi
    return len(seen)
