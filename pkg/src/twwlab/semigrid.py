"""Regular semigrids: schemes, generation, G^S encoding and decoding, classification.

Points of an m x n semigrid are pairs (i, j) in [m+1] x [n+1]; row 0 is the
interval I_0 and row i >= 1 is I_i. Rows 1..m always come in lexicographic
order; orientation '<' puts I_0 first and '>' puts it last.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Callable, Iterable, Iterator

from twwlab.core import (
    GRAPH,
    AtomicTypeCode,
    OrderedStructure,
    Signature,
    TwwError,
    atp,
)

RTYPES = ("<=", ">=", "=", "!=")
ORIENTS = ("<", ">")
# Directions between p < q in rows 1..m, named geometrically:
# right: same row; down: same column; downright: later row, later column;
# downleft: later row, earlier column.
DIRECTIONS = ("right", "down", "downright", "downleft")
ARROWS = {"right": "→", "down": "↓", "downright": "↘", "downleft": "↙"}

Point = tuple[int, int]


def relates(rtype: str, a: int, b: int) -> bool:
    if rtype == "<=":
        return a <= b
    if rtype == ">=":
        return a >= b
    if rtype == "=":
        return a == b
    if rtype == "!=":
        return a != b
    raise TwwError(f"unknown R-type {rtype!r}")


def direction(p: Point, q: Point) -> str:
    """Direction from p to q for p < q lexicographically, both off row 0."""
    (i, j), (k, l) = p, q
    if i == k:
        return "right"
    if j == l:
        return "down"
    return "downright" if j < l else "downleft"


@dataclass(frozen=True)
class Scheme:
    """Scheme of a regular semigrid of ordered graphs."""
    rtype: str
    orient: str = "<"
    clique: bool = False
    dirs: frozenset = frozenset()

    def __post_init__(self):
        if self.rtype not in RTYPES:
            raise TwwError(f"unknown R-type {self.rtype!r}")
        if self.orient not in ORIENTS:
            raise TwwError(f"unknown orientation {self.orient!r}")
        object.__setattr__(self, "dirs", frozenset(self.dirs))
        if not self.dirs <= set(DIRECTIONS):
            raise TwwError(f"unknown directions {sorted(self.dirs - set(DIRECTIONS))}")

    @property
    def id(self) -> int:
        mask = sum(1 << i for i, d in enumerate(DIRECTIONS) if d in self.dirs)
        r = RTYPES.index(self.rtype)
        s = ORIENTS.index(self.orient)
        t = 0 if self.clique else 1
        return ((r * 2 + s) * 2 + t) * 16 + mask

    @classmethod
    def from_id(cls, sid: int) -> "Scheme":
        if not 0 <= sid < 256:
            raise TwwError(f"scheme id {sid} out of range 0..255")
        mask, rest = sid % 16, sid // 16
        t, rest = rest % 2, rest // 2
        s, r = rest % 2, rest // 2
        dirs = frozenset(d for i, d in enumerate(DIRECTIONS) if mask >> i & 1)
        return cls(RTYPES[r], ORIENTS[s], t == 0, dirs)

    def describe(self) -> str:
        arrows = "".join(ARROWS[d] for d in DIRECTIONS if d in self.dirs) or "∅"
        return (f"#{self.id} type {self.rtype}, I_0 {'first' if self.orient == '<' else 'last'}, "
                f"{'clique' if self.clique else 'independent'}, dirs {arrows}")

    def adjacent(self, p: Point, q: Point) -> bool:
        if p == q:
            return False
        if p[0] == 0 and q[0] == 0:
            return self.clique
        if p[0] == 0:
            return relates(self.rtype, p[1], q[1])
        if q[0] == 0:
            return relates(self.rtype, q[1], p[1])
        if q < p:
            p, q = q, p
        return direction(p, q) in self.dirs


def _check_sig(sig: Signature):
    if any(a not in (1, 2) for _, a in sig.symbols):
        raise TwwError("signature must be binary")


def enumerate_schemes(sig: Signature = GRAPH):
    """All schemes for ``sig``, in canonical id order for graphs.

    For the graph signature these are the 256 graph schemes; otherwise a lazy
    iterator over consistent general schemes.
    """
    _check_sig(sig)
    if sig == GRAPH:
        return [Scheme.from_id(i) for i in range(256)]
    return enumerate_general_schemes(sig)


def position(orient: str, m: int, n: int, p: Point) -> int:
    i, j = p
    if orient == "<":
        return i * (n + 1) + j
    return (i - 1) * (n + 1) + j if i else m * (n + 1) + j


def _check_dims(m: int, n: int):
    if m < 1 or n < 1:
        raise TwwError("semigrid dimensions must be at least 1 x 1")


def grid_points(m: int, n: int) -> list[Point]:
    return [(i, j) for i in range(m + 1) for j in range(n + 1)]


def _graph_on(scheme: Scheme, m: int, n: int, points: Iterable[Point]) -> tuple[OrderedStructure, list[Point]]:
    pts = sorted(set(points), key=lambda p: position(scheme.orient, m, n, p))
    edges = [(a, b) for a, b in combinations(range(len(pts)), 2) if scheme.adjacent(pts[a], pts[b])]
    return OrderedStructure.graph(len(pts), edges), pts


def generate_semigrid(scheme, m: int, n: int) -> OrderedStructure:
    """The regular m x n semigrid of a scheme; (m+1)(n+1) elements."""
    _check_dims(m, n)
    if isinstance(scheme, GeneralScheme):
        return scheme.generate(m, n)
    return _graph_on(scheme, m, n, grid_points(m, n))[0]


def semigrid_layout(scheme, m: int, n: int) -> list[Point]:
    """``layout[k]`` is the grid point placed at position ``k``."""
    orient = scheme.orient
    return sorted(grid_points(m, n), key=lambda p: position(orient, m, n, p))


def gs_points(m: int, n: int, S: Iterable[Point]) -> list[Point]:
    S = set(S)
    for i, j in S:
        if not (1 <= i <= m and 1 <= j <= n):
            raise TwwError(f"cell ({i}, {j}) outside 1..{m} x 1..{n}")
    return [(0, 0)] + [(0, j) for j in range(1, n + 1)] + [(i, 0) for i in range(1, m + 1)] + sorted(S)


def generate_GS(scheme: Scheme, m: int, n: int, S: Iterable[Point]) -> OrderedStructure:
    """G^S: the semigrid induced on the corner, column and row representatives, and S."""
    _check_dims(m, n)
    return _graph_on(scheme, m, n, gs_points(m, n, S))[0]


def gs_layout(scheme: Scheme, m: int, n: int, S: Iterable[Point]) -> list[Point]:
    _check_dims(m, n)
    return _graph_on(scheme, m, n, gs_points(m, n, S))[1]


def is_R_graph(G: OrderedStructure, X, Y, rtype: str) -> bool:
    X, Y = sorted(X), sorted(Y)
    if len(X) != len(Y):
        raise TwwError("R-graph sides must have equal size")
    return all(G.holds("E", x, y) == relates(rtype, i, j)
               for i, x in enumerate(X) for j, y in enumerate(Y))


def _decode_with(G: OrderedStructure, scheme: Scheme, n: int):
    N = G.n
    if scheme.orient == "<":
        frame, rest = list(range(n + 1)), list(range(n + 1, N))
    else:
        frame, rest = list(range(N - n - 1, N)), list(range(N - n - 1))
    if any(G.holds("E", a, b) != scheme.clique for a, b in combinations(frame, 2)):
        return f"n={n}: I_0 is not a{' clique' if scheme.clique else 'n independent set'}"
    signature = {tuple(relates(scheme.rtype, a, b) for a in range(n + 1)): b for b in range(n + 1)}
    row, cells, reps = 0, [], 0
    for x in rest:
        b = signature.get(tuple(G.holds("E", f, x) for f in frame))
        if b is None:
            return f"n={n}: element {x} matches no column of I_0"
        if b == 0:
            row += 1
            reps += 1
        elif row == 0:
            return f"n={n}: element {x} precedes the first row representative"
        else:
            cells.append((row, b))
    if reps == 0:
        return f"n={n}: no row representatives"
    if len(set(cells)) != len(cells):
        return f"n={n}: a cell occurs twice"
    if generate_GS(scheme, reps, n, cells) != G:
        return f"n={n}: regenerated G^S differs"
    return reps, n, frozenset(cells)


def decode_GS_all(G: OrderedStructure, scheme: Scheme) -> tuple[list, list[str]]:
    """Every (m, n, S) whose G^S equals G, plus the failure reason for other n."""
    if not G.is_graph():
        raise TwwError("decode_GS expects an ordered graph")
    found, reasons = [], []
    for n in range(1, G.n - 1):
        got = _decode_with(G, scheme, n)
        (reasons if isinstance(got, str) else found).append(got)
    return found, reasons


def decode_GS(G: OrderedStructure, scheme: Scheme) -> tuple[int, int, frozenset]:
    """Recover (m, n, S) from G^S.

    Each element outside I_0 is placed in the column whose R-graph pattern
    against I_0 it matches; column 0 marks row representatives. If several
    dimensions reproduce G the one with the smallest n is returned.
    """
    found, reasons = decode_GS_all(G, scheme)
    if not found:
        raise TwwError("not a G^S for this scheme: " + ("; ".join(reasons) or "too few elements"))
    return found[0]


@lru_cache(maxsize=64)
def _graph_table(m: int, n: int) -> dict[OrderedStructure, tuple[int, ...]]:
    """Each m x n semigrid mapped to the scheme ids generating it, increasing."""
    table: dict[OrderedStructure, tuple[int, ...]] = {}
    for sid in range(256):
        G = generate_semigrid(Scheme.from_id(sid), m, n)
        table[G] = table.get(G, ()) + (sid,)
    return table


def classify_all(S: OrderedStructure) -> list[tuple[Scheme, int, int]]:
    """Every (scheme, m, n) generating exactly S (graph signature)."""
    out = []
    N = S.n
    for m in range(1, N):
        if N % (m + 1) or N // (m + 1) < 2:
            continue
        n = N // (m + 1) - 1
        out.extend((Scheme.from_id(sid), m, n) for sid in _graph_table(m, n).get(S, ()))
    return out


def classify_regular_semigrid(S: OrderedStructure):
    """(scheme, m, n) if S is a regular semigrid, else None.

    Ties are broken by smallest m, then smallest scheme id (graphs), which is
    what happens when a scheme component is not observable at these sizes.
    """
    if S.sig == GRAPH:
        if not S.is_graph():
            return None
        N = S.n
        for m in range(1, N):
            if N % (m + 1) or N // (m + 1) < 2:
                continue
            n = N // (m + 1) - 1
            sids = _graph_table(m, n).get(S)
            if sids:
                return Scheme.from_id(sids[0]), m, n
        return None
    return classify_general(S)


# general binary signatures ---------------------------------------------------

ORDER_TYPES = ("<", "=", ">")


def _cmp(a: int, b: int) -> str:
    return "<" if a < b else ("=" if a == b else ">")


@dataclass(frozen=True)
class GeneralScheme:
    """Scheme of a regular semigrid over an arbitrary binary signature.

    ``f1[x]``: type of a pair in row 0 whose columns compare as x.
    ``f2[3*x+y]``: type of a pair off row 0 whose rows compare as x and
    columns as y. ``f3[x]``: type of (p, b) with p off row 0 and b in row 0,
    where x compares the column of p with that of b.
    """
    sig: Signature
    orient: str
    f1: tuple[AtomicTypeCode, ...]
    f2: tuple[AtomicTypeCode, ...]
    f3: tuple[AtomicTypeCode, ...]

    def code(self, p: Point, q: Point) -> AtomicTypeCode:
        if p[0] == 0 and q[0] == 0:
            return self.f1[ORDER_TYPES.index(_cmp(p[1], q[1]))]
        if q[0] == 0:
            return self.f3[ORDER_TYPES.index(_cmp(p[1], q[1]))]
        if p[0] == 0:
            return self.f3[ORDER_TYPES.index(_cmp(q[1], p[1]))].converse()
        return self.f2[3 * ORDER_TYPES.index(_cmp(p[0], q[0])) + ORDER_TYPES.index(_cmp(p[1], q[1]))]

    def generate(self, m: int, n: int) -> OrderedStructure:
        _check_dims(m, n)
        pts = grid_points(m, n)
        if self.orient == ">":
            pts = pts[::-1]
        N = len(pts)
        rels = {name: [[0] * N for _ in range(N)] for name in self.sig.binary}
        sets = {name: [0] * N for name in self.sig.unary}
        for a in range(N):
            for b in range(N):
                c = self.code(pts[a], pts[b])
                for name, (x, _) in zip(self.sig.binary, c.rels):
                    rels[name][a][b] = int(x)
                if a == b:
                    for name, (u, _) in zip(self.sig.unary, c.sets):
                        sets[name][a] = int(u)
        return OrderedStructure.build(self.sig, N, rels, sets)


def _consistent(scheme: GeneralScheme) -> bool:
    # every ordered pair's code must be realizable and agree with its converse
    f3 = scheme.f3
    if len(set(f3)) == 1:
        return False
    sample = grid_points(2, 2)
    if scheme.orient == ">":
        order = {p: -k for k, p in enumerate(sample)}
    else:
        order = {p: k for k, p in enumerate(sample)}
    for p in sample:
        for q in sample:
            c = scheme.code(p, q)
            if c.order != _cmp(order[p], order[q]):
                return False
            if scheme.code(q, p) != c.converse():
                return False
            if p == q and any(x != y for x, y in c.rels + c.sets):
                return False
    units = {}
    for p in sample:
        for q in sample:
            c = scheme.code(p, q)
            for k, (u, v) in enumerate(c.sets):
                for point, val in ((p, u), (q, v)):
                    if units.setdefault((point[0] > 0, k), val) != val:
                        return False
    return True


def enumerate_general_schemes(sig: Signature) -> Iterator[GeneralScheme]:
    """Consistent general schemes, generated from their free bits."""
    _check_sig(sig)
    nb, nu = len(sig.binary), len(sig.unary)

    def code(order, pairs, sets):
        return AtomicTypeCode(order, tuple(pairs), tuple(sets))

    for orient in ORIENTS:
        lo, hi = ("<", ">") if orient == "<" else (">", "<")
        # unary values on row 0 and off row 0
        for ub in product((False, True), repeat=nu):
            for uc in product((False, True), repeat=nu):
                bb = tuple(zip(ub, ub))
                cc = tuple(zip(uc, uc))
                cb = tuple(zip(uc, ub))
                # per binary symbol: row-0 (diag, fwd, back), off-row diag + 4
                # forward directions x 2, and 3 column relations x 2
                for bits in product((False, True), repeat=18 * nb):
                    per = [bits[18 * r:18 * r + 18] for r in range(nb)]
                    f1_lt = code(lo, [(x[1], x[2]) for x in per], bb)
                    f1_eq = code("=", [(x[0], x[0]) for x in per], bb)
                    f1 = (f1_lt, f1_eq, f1_lt.converse())
                    f2 = [None] * 9
                    f2[4] = code("=", [(x[3], x[3]) for x in per], cc)
                    # forward (p before q lexicographically): (=,<), (<,<), (<,=), (<,>)
                    for slot, (rx, cy) in enumerate(((1, 0), (0, 0), (0, 1), (0, 2))):
                        c = code(lo, [(x[4 + 2 * slot], x[5 + 2 * slot]) for x in per], cc)
                        f2[3 * rx + cy] = c
                        f2[3 * (2 - rx) + (2 - cy)] = c.converse()
                    f3 = tuple(code(hi, [(x[12 + 2 * k], x[13 + 2 * k]) for x in per], cb)
                               for k in range(3))
                    s = GeneralScheme(sig, orient, f1, tuple(f2), f3)
                    if len(set(f3)) > 1:
                        yield s


def classify_general(S: OrderedStructure):
    """(GeneralScheme, m, n) if S is a regular semigrid over its signature."""
    N = S.n
    for m in range(1, N):
        if N % (m + 1) or N // (m + 1) < 2:
            continue
        n = N // (m + 1) - 1
        for orient in ORIENTS:
            got = _read_general(S, orient, m, n)
            if got is not None:
                return got, m, n
    return None


def _read_general(S: OrderedStructure, orient: str, m: int, n: int):
    pts = grid_points(m, n)
    if orient == ">":
        pts = pts[::-1]
    where = {p: k for k, p in enumerate(pts)}
    f1: dict[str, AtomicTypeCode] = {}
    f2: dict[tuple[str, str], AtomicTypeCode] = {}
    f3: dict[str, AtomicTypeCode] = {}
    for p in pts:
        for q in pts:
            c = atp(S, where[p], where[q])
            if p[0] == 0 and q[0] == 0:
                slot, key = f1, _cmp(p[1], q[1])
            elif q[0] == 0:
                slot, key = f3, _cmp(p[1], q[1])
            elif p[0] == 0:
                continue
            else:
                slot, key = f2, (_cmp(p[0], q[0]), _cmp(p[1], q[1]))
            if slot.setdefault(key, c) != c:
                return None
    if len(set(f3.values())) < 2:
        return None
    # with a single row, pairs in distinct rows never occur; fill those
    # entries with the all-false code of the right order
    diag = f2["=", "="]
    for x in ORDER_TYPES:
        for y in ORDER_TYPES:
            if (x, y) not in f2:
                lex = x if x != "=" else y
                if orient == ">":
                    lex = {"<": ">", ">": "<"}[lex]
                f2[x, y] = AtomicTypeCode(lex, tuple((False, False) for _ in diag.rels), diag.sets)
    return GeneralScheme(S.sig, orient, tuple(f1[x] for x in ORDER_TYPES),
                         tuple(f2[x, y] for x in ORDER_TYPES for y in ORDER_TYPES),
                         tuple(f3[x] for x in ORDER_TYPES))


def semigrid_to_graph(S: OrderedStructure) -> OrderedStructure:
    """Quantifier-free map of a general regular semigrid to an ordered graph.

    x ~ y iff atp(x, y) or atp(y, x) is the type of (p, b) with p directly
    below b.
    """
    got = classify_general(S)
    if got is None:
        raise TwwError("structure is not a regular semigrid")
    scheme = got[0]
    tau = scheme.f3[1]
    edges = [(a, b) for a, b in combinations(range(S.n), 2)
             if atp(S, a, b) == tau or atp(S, b, a) == tau]
    return OrderedStructure.graph(S.n, edges)


def random_cells(rng: random.Random, m: int, n: int, p: float = 0.5) -> frozenset:
    return frozenset((i, j) for i in range(1, m + 1) for j in range(1, n + 1) if rng.random() < p)


# homogeneous grids and extraction --------------------------------------------


@dataclass
class PairColoring:
    """Coloring of ordered pairs of points of an m x n grid (0-based points)."""
    m: int
    n: int
    color: Callable[[Point, Point], object]


def grid_pair_type(p: Point, q: Point) -> tuple[str, str]:
    return _cmp(p[0], q[0]), _cmp(p[1], q[1])


def is_homogeneous_coloring(c: PairColoring, rows, cols) -> bool:
    seen: dict[tuple[str, str], object] = {}
    pts = [(i, j) for i in rows for j in cols]
    for p in pts:
        for q in pts:
            if seen.setdefault(grid_pair_type(p, q), c.color(p, q)) != c.color(p, q):
                return False
    return True


def homogenize_grid(c: PairColoring, m: int, n: int):
    """Lexicographically least (rows, cols) choice whose induced coloring is homogeneous.

    Exhaustive over row and column subsets; None means no such subgrid exists
    in this host grid.
    """
    if not (1 <= m <= c.m and 1 <= n <= c.n):
        raise TwwError(f"cannot pick {m} x {n} inside a {c.m} x {c.n} grid")
    cache: dict = {}

    def color(p, q):
        key = (p, q)
        if key not in cache:
            cache[key] = c.color(p, q)
        return cache[key]

    memo = PairColoring(c.m, c.n, color)
    for rows in combinations(range(c.m), m):
        for cols in combinations(range(c.n), n):
            if is_homogeneous_coloring(memo, rows, cols):
                return rows, cols
    return None


def tuple_type(S: OrderedStructure, elems) -> tuple:
    """Atomic type of a tuple: the atomic types of all its ordered pairs."""
    return tuple(atp(S, a, b) for a in elems for b in elems)


def _sorted_grid(S: OrderedStructure, g):
    cells = g.cell_map(S)
    if cells is None:
        raise TwwError("formula does not define a grid on these sets")
    ai = sorted(range(g.m), key=lambda i: g.A[i])
    bj = sorted(range(g.n), key=lambda j: g.B[j])
    return [g.A[i] for i in ai], [g.B[j] for j in bj], {
        (x, y): cells[i, j] for x, i in enumerate(ai) for y, j in enumerate(bj)}


def grid_coloring(S: OrderedStructure, g) -> PairColoring:
    """Pairs of cells colored by the type of (a, b, a', b', c, c')."""
    A, B, cell = _sorted_grid(S, g)

    def color(p, q):
        return tuple_type(S, A[p[0]] + B[p[1]] + A[q[0]] + B[q[1]] + (cell[p], cell[q]))

    return PairColoring(len(A), len(B), color)


def restrict_grid(S: OrderedStructure, g, rows, cols):
    from twwlab.logic import GridDefinition

    A, B, cell = _sorted_grid(S, g)
    return GridDefinition(g.phi, g.xs, g.ys, g.z, [A[i] for i in rows], [B[j] for j in cols],
                          [cell[i, j] for i in rows for j in cols])


def homogeneous_subgrid(S: OrderedStructure, g, m: int, n: int):
    """Sub-grid of g that is homogeneous, or None."""
    got = homogenize_grid(grid_coloring(S, g), m, n)
    if got is None:
        return None
    return restrict_grid(S, g, *got)


@dataclass
class Extraction:
    structure: OrderedStructure
    elements: list[int]  # host element behind each output element
    lex_order: tuple[str, str, str]  # (priority side, sign of A, sign of B)
    variable: str
    classified: tuple


def extract_semigrid_from_grid(S: OrderedStructure, g) -> Extraction:
    """Regular semigrid induced by the cells and one coordinate of the column tuples."""
    A, B, cell = _sorted_grid(S, g)
    m, n = len(A), len(B)
    if m < 2 or n < 2:
        raise TwwError("grid must be at least 2 x 2")
    xs, ys = g.xs, g.ys
    match = None
    for first in ("A", "B"):
        for sa in (1, -1):
            for sb in (1, -1):
                def key(p, first=first, sa=sa, sb=sb):
                    i, j = p
                    return (sa * i, sb * j) if first == "A" else (sb * j, sa * i)
                pts = sorted(cell, key=key)
                if all(cell[p] < cell[q] for p, q in zip(pts, pts[1:])):
                    match = (first, "+" if sa > 0 else "-", "+" if sb > 0 else "-")
                    break
            if match:
                break
        if match:
            break
    if match is None:
        raise TwwError("the order on C matches none of the 8 lexicographic orders")
    if match[0] == "B":
        A, B, xs, ys = B, A, ys, xs
        cell = {(j, i): c for (i, j), c in cell.items()}
    c0 = cell[0, 0]
    var = None
    for k, y in enumerate(ys):
        if atp(S, B[0][k], c0) != atp(S, B[1][k], c0):
            var = (k, y)
            break
    if var is None:
        raise TwwError("no coordinate of the column tuples separates two columns; "
                       "a quantifier-free grid formula cannot do that")
    k, y = var
    Bp = {b[k] for b in B}
    C = set(cell.values())
    if len(Bp) != len(B) or Bp & C:
        raise TwwError("projected column elements are not distinct from each other and from C")
    elems = sorted(C | Bp)
    out = S.induced(elems)
    got = classify_regular_semigrid(out)
    if got is None:
        raise TwwError("induced structure is not a regular semigrid (is the grid homogeneous?)")
    return Extraction(out, elems, match, y, got)
