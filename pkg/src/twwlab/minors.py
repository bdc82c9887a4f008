"""Matrix side: zones, distinct-row counts, grid minors, mixed minors, bad intervals."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from twwlab.core import OrderedStructure, TwwError, intervals

# Past these sizes the searches stop being exhaustive and a None answer is
# only a heuristic verdict.
GRID_EXHAUSTIVE_DIM = 16
GRID_EXHAUSTIVE_T = 4
MIXED_EXHAUSTIVE_DIM = 14
MIXED_EXHAUSTIVE_T = 3

WITNESS_VERSION = 1


@dataclass(frozen=True)
class TypeMatrix:
    entries: tuple[tuple[int, ...], ...]
    row_labels: tuple[int, ...] | None = None
    col_labels: tuple[int, ...] | None = None

    def __post_init__(self):
        widths = {len(r) for r in self.entries}
        if len(widths) > 1:
            raise TwwError("matrix rows have different lengths")

    @classmethod
    def of(cls, rows) -> "TypeMatrix":
        if isinstance(rows, TypeMatrix):
            return rows
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def from_structure(cls, S: OrderedStructure) -> "TypeMatrix":
        """Adjacency-type matrix: entry (a, b) is the interned code of atp(a, b)."""
        labels = tuple(range(S.n))
        return cls(S.code_matrix, labels, labels)

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def transpose(self) -> "TypeMatrix":
        return TypeMatrix(tuple(zip(*self.entries)) if self.entries else (),
                          self.col_labels, self.row_labels)

    def __getitem__(self, idx):
        return self.entries[idx]


def distinct_rows(M, rows: Sequence[int], cols: Sequence[int]) -> int:
    return len({tuple(M[r][c] for c in cols) for r in rows})


def distinct_cols(M, rows: Sequence[int], cols: Sequence[int]) -> int:
    return len({tuple(M[r][c] for r in rows) for c in cols})


@dataclass(frozen=True)
class Zone:
    kind: str  # "one" | "rows" | "cols"
    evidence: tuple

    def to_json(self) -> dict:
        return {"kind": self.kind, "evidence": [list(e) if isinstance(e, tuple) else e
                                                for e in self.evidence]}


@dataclass(frozen=True)
class GridMinorWitness:
    t: int
    row_cuts: tuple[int, ...]
    col_cuts: tuple[int, ...]
    cells: tuple[tuple[int, int], ...]  # one 1-entry per zone, row-major zone order
    exhaustive: bool = True

    def to_json(self) -> dict:
        return {"version": WITNESS_VERSION, "kind": "grid", "t": self.t,
                "rowCuts": list(self.row_cuts), "colCuts": list(self.col_cuts),
                "zones": [{"kind": "one", "evidence": [list(c)]} for c in self.cells],
                "exhaustive": self.exhaustive}


@dataclass(frozen=True)
class MixedMinorWitness:
    k: int
    t: int
    row_cuts: tuple[int, ...]
    col_cuts: tuple[int, ...]
    zones: tuple[Zone, ...]  # row-major zone order
    exhaustive: bool = True

    def to_json(self) -> dict:
        return {"version": WITNESS_VERSION, "kind": "mixed", "k": self.k, "t": self.t,
                "rowCuts": list(self.row_cuts), "colCuts": list(self.col_cuts),
                "zones": [z.to_json() for z in self.zones],
                "exhaustive": self.exhaustive}

    def transpose(self) -> "MixedMinorWitness":
        t = self.t
        flip = {"rows": "cols", "cols": "rows"}
        zones = tuple(Zone(flip[self.zones[i * t + j].kind], self.zones[i * t + j].evidence)
                      for j in range(t) for i in range(t))
        return MixedMinorWitness(self.k, t, self.col_cuts, self.row_cuts, zones, self.exhaustive)


@dataclass
class SearchResult:
    witness: GridMinorWitness | MixedMinorWitness | None
    exhaustive: bool
    stats: dict = field(default_factory=dict)


def witness_from_json(doc: dict):
    if doc.get("version") != WITNESS_VERSION:
        raise TwwError(f"unsupported witness version {doc.get('version')}")
    rc, cc = tuple(doc["rowCuts"]), tuple(doc["colCuts"])
    if doc["kind"] == "grid":
        cells = tuple(tuple(z["evidence"][0]) for z in doc["zones"])
        return GridMinorWitness(doc["t"], rc, cc, cells, doc.get("exhaustive", True))
    if doc["kind"] == "mixed":
        zones = tuple(Zone(z["kind"], tuple(z["evidence"])) for z in doc["zones"])
        return MixedMinorWitness(doc["k"], doc["t"], rc, cc, zones, doc.get("exhaustive", True))
    raise TwwError(f"unknown witness kind {doc['kind']!r}")


# generic cut search; `ok(rows, cols)` must be monotone in cols

def _greedy_cuts(n: int, t: int, parts: list[range], ok) -> tuple[int, ...] | None:
    # Earliest cuts such that every fixed part sees an ok zone in every new part.
    # Since ok is monotone, the earliest choice is both feasible-preserving
    # and lexicographically least.
    cuts = []
    start = 0
    for p in range(t):
        if p == t - 1:
            end = n
            if start >= n or not all(ok(P, range(start, end)) for P in parts):
                return None
            return tuple(cuts)
        end = start + 1
        while end <= n - (t - 1 - p):
            if all(ok(P, range(start, end)) for P in parts):
                break
            end += 1
        else:
            return None
        cuts.append(end)
        start = end
    return tuple(cuts)


def _exhaustive_search(m: int, n: int, t: int, ok):
    for rc in combinations(range(1, m), t - 1):
        R = intervals(rc, m)
        cc = _greedy_cuts(n, t, R, ok)
        if cc is not None:
            return rc, cc
    return None


def _heuristic_search(m: int, n: int, t: int, ok):
    # greedy row cuts against seeded column cuts, then greedy column cuts back
    def ok_t(C, R):
        return ok(R, C)

    seeds = [tuple(round(i * n / t) for i in range(1, t)), tuple(range(1, t))]
    for cc in seeds:
        rc = _greedy_cuts(m, t, intervals(cc, n), ok_t)
        if rc is not None:
            cc = _greedy_cuts(n, t, intervals(rc, m), ok)
            if cc is not None:
                return rc, cc
    return None


def _check_dims(M: TypeMatrix, t: int):
    if t < 1:
        raise TwwError("t must be at least 1")
    if t > min(M.m, M.n):
        raise TwwError(f"t={t} exceeds matrix dimensions {M.m}x{M.n}")


def _first_one(M, R: range, C: range):
    for r in R:
        for c in C:
            if M[r][c]:
                return (r, c)
    return None


def grid_is_exhaustive(m: int, n: int, t: int) -> bool:
    return min(m, n) <= GRID_EXHAUSTIVE_DIM and t <= GRID_EXHAUSTIVE_T


def search_grid_minor(N, t: int) -> SearchResult:
    N = TypeMatrix.of(N)
    _check_dims(N, t)
    E = N.entries

    def ok(R, C):
        return any(E[r][c] for r in R for c in C)

    exhaustive = grid_is_exhaustive(N.m, N.n, t)
    found = (_exhaustive_search(N.m, N.n, t, ok) if exhaustive
             else _heuristic_search(N.m, N.n, t, ok))
    if found is None:
        return SearchResult(None, exhaustive)
    rc, cc = found
    cells = tuple(_first_one(E, R, C) for R in intervals(rc, N.m) for C in intervals(cc, N.n))
    return SearchResult(GridMinorWitness(t, rc, cc, cells, exhaustive), exhaustive)


def find_grid_minor(N, t: int) -> GridMinorWitness | None:
    """t-grid minor of a 0-1 matrix, lexicographically least cuts first."""
    return search_grid_minor(N, t).witness


def _distinct_indices(vectors) -> list[int]:
    seen = {}
    for i, v in vectors:
        seen.setdefault(v, i)
    return sorted(seen.values())


def _mixed_zone(M, R: range, C: range, k: int) -> Zone:
    rows = _distinct_indices((r, tuple(M[r][c] for c in C)) for r in R)
    if len(rows) >= k:
        return Zone("rows", tuple(rows[:k]))
    cols = _distinct_indices((c, tuple(M[r][c] for r in R)) for c in C)
    return Zone("cols", tuple(cols[:k]))


def mixed_is_exhaustive(m: int, n: int, t: int) -> bool:
    return min(m, n) <= MIXED_EXHAUSTIVE_DIM and t <= MIXED_EXHAUSTIVE_T


def search_mixed_minor(M, k: int, t: int) -> SearchResult:
    M = TypeMatrix.of(M)
    _check_dims(M, t)
    if k < 1:
        raise TwwError("k must be at least 1")
    E = M.entries

    def ok(R, C):
        return distinct_rows(E, R, C) >= k or distinct_cols(E, R, C) >= k

    exhaustive = mixed_is_exhaustive(M.m, M.n, t)
    found = (_exhaustive_search(M.m, M.n, t, ok) if exhaustive
             else _heuristic_search(M.m, M.n, t, ok))
    if found is None:
        return SearchResult(None, exhaustive)
    rc, cc = found
    zones = tuple(_mixed_zone(E, R, C, k) for R in intervals(rc, M.m) for C in intervals(cc, M.n))
    return SearchResult(MixedMinorWitness(k, t, rc, cc, zones, exhaustive), exhaustive)


def find_mixed_minor(M, k: int, t: int) -> MixedMinorWitness | None:
    """(k,t)-mixed minor: t x t convex zoning, each zone with k distinct rows or columns."""
    return search_mixed_minor(M, k, t).witness


# validators; deliberately written without the search helpers

def _valid_cuts(cuts, size: int, t: int) -> bool:
    cuts = list(cuts)
    return (len(cuts) == t - 1 and all(isinstance(c, int) for c in cuts)
            and all(a < b for a, b in zip([0] + cuts, cuts + [size])))


def _bounds(cuts, size: int) -> list[tuple[int, int]]:
    b = [0, *cuts, size]
    return list(zip(b, b[1:]))


def validate_grid_witness(N, w: GridMinorWitness) -> bool:
    N = TypeMatrix.of(N)
    t = w.t
    if not (_valid_cuts(w.row_cuts, N.m, t) and _valid_cuts(w.col_cuts, N.n, t)):
        return False
    if len(w.cells) != t * t:
        return False
    zones = [(r, c) for r in _bounds(w.row_cuts, N.m) for c in _bounds(w.col_cuts, N.n)]
    for ((r0, r1), (c0, c1)), (r, c) in zip(zones, w.cells):
        if not (r0 <= r < r1 and c0 <= c < c1 and N.entries[r][c] == 1):
            return False
    return True


def validate_mixed_witness(M, w: MixedMinorWitness) -> bool:
    M = TypeMatrix.of(M)
    t, k = w.t, w.k
    if not (_valid_cuts(w.row_cuts, M.m, t) and _valid_cuts(w.col_cuts, M.n, t)):
        return False
    if len(w.zones) != t * t:
        return False
    zones = [(r, c) for r in _bounds(w.row_cuts, M.m) for c in _bounds(w.col_cuts, M.n)]
    for ((r0, r1), (c0, c1)), z in zip(zones, w.zones):
        ev = list(z.evidence)
        if len(ev) != k or len(set(ev)) != k:
            return False
        if z.kind == "rows":
            if not all(r0 <= r < r1 for r in ev):
                return False
            pats = {tuple(M.entries[r][c0:c1]) for r in ev}
        elif z.kind == "cols":
            if not all(c0 <= c < c1 for c in ev):
                return False
            pats = {tuple(M.entries[r][c] for r in range(r0, r1)) for c in ev}
        else:
            return False
        if len(pats) != k:
            return False
    return True


def mt_threshold(t: int, profile: str = "exp8") -> int:
    """Configured Marcus-Tardos constant c_t.

    Profiles are ``"expA"`` for ``A * 2**t``, ``"linA"`` for ``A * t`` and
    ``"rootA"`` for ``A * ceil(sqrt(t))``, with A a positive integer. Only the
    exponential form matches the known asymptotics; the others are desk-scale
    settings for experiments.
    """
    if t < 1:
        raise TwwError("t must be at least 1")
    m = re.fullmatch(r"(exp|lin|root)([1-9][0-9]*)", profile)
    if m is None:
        raise TwwError(f"unknown constant profile {profile!r}")
    kind, a = m.group(1), int(m.group(2))
    if kind == "exp":
        return a * 2 ** t
    if kind == "lin":
        return a * t
    return a * (math.isqrt(t - 1) + 1)


@dataclass(frozen=True)
class BadInterval:
    rows: tuple[int, int]  # half-open
    cols: tuple[int, int]  # half-open
    distinct: int


def minimal_bad_intervals(M, R, k: int) -> list[BadInterval]:
    """All inclusion-minimal column intervals I with >= k distinct rows in M[R x I]."""
    M = TypeMatrix.of(M)
    R = range(R[0], R[1]) if isinstance(R, tuple) else R
    if len(R) == 0:
        raise TwwError("row interval must be nonempty")
    if k < 1:
        raise TwwError("k must be at least 1")
    rows = [M.entries[r] for r in R]
    n = M.n

    def count(a, b):
        return len({row[a:b] for row in rows})

    # ends[a]: least b with >= k distinct rows on [a, b); nondecreasing in a
    ends: list[int | None] = []
    b = 1
    for a in range(n):
        b = max(b, a + 1)
        while b <= n and count(a, b) < k:
            b += 1
        ends.append(b if b <= n else None)
    out = []
    for a, b in enumerate(ends):
        if b is None:
            break
        nxt = ends[a + 1] if a + 1 < n else None
        if nxt is None or nxt > b:
            out.append(BadInterval((R.start, R.stop), (a, b), count(a, b)))
    return out


def bad_columns(M, R, k: int) -> set[int]:
    return {iv.cols[0] for iv in minimal_bad_intervals(M, R, k)}
