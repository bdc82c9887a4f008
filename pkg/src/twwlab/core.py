"""Ordered binary structures, atomic types, partitions and contraction sequences.

The domain of every structure is ``0..n-1`` and the order ``<=`` is always the
index order, so it is never stored. Two ordered structures are isomorphic iff
they are equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, NamedTuple, Sequence


class TwwError(ValueError):
    """Domain error raised by the library (maps to CLI exit code 1)."""


ORDER_SYMBOL = "<="


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise TwwError(f"duplicate symbol names in {names}")
        for name, arity in self.symbols:
            if name == ORDER_SYMBOL:
                raise TwwError("'<=' is implicit and must not be listed")
            if arity not in (1, 2):
                raise TwwError(f"symbol {name} has arity {arity}; only 1 and 2 allowed")
            if not name or any(c.isspace() or c in "():" for c in name):
                raise TwwError(f"bad symbol name {name!r}")

    @property
    def binary(self) -> tuple[str, ...]:
        return tuple(name for name, a in self.symbols if a == 2)

    @property
    def unary(self) -> tuple[str, ...]:
        return tuple(name for name, a in self.symbols if a == 1)

    def arity(self, name: str) -> int:
        if name == ORDER_SYMBOL:
            return 2
        for s, a in self.symbols:
            if s == name:
                return a
        raise TwwError(f"unknown symbol {name!r}")


GRAPH = Signature((("E", 2),))


class AtomicTypeCode(NamedTuple):
    """Atomic type of an ordered pair ``(a, b)``.

    ``order`` is one of ``'<'``, ``'='``, ``'>'``; ``rels`` holds ``(R(a,b), R(b,a))``
    per binary symbol and ``sets`` holds ``(U(a), U(b))`` per unary symbol.
    """
    order: str
    rels: tuple[tuple[bool, bool], ...]
    sets: tuple[tuple[bool, bool], ...]

    def converse(self) -> "AtomicTypeCode":
        flip = {"<": ">", ">": "<", "=": "="}[self.order]
        return AtomicTypeCode(flip, tuple((y, x) for x, y in self.rels),
                              tuple((y, x) for x, y in self.sets))


def _bits(rows) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(1 if v else 0 for v in row) for row in rows)


@dataclass(frozen=True)
class OrderedStructure:
    sig: Signature
    n: int
    rels: tuple[tuple[tuple[int, ...], ...], ...] = ()
    sets: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise TwwError("negative domain size")
        if len(self.rels) != len(self.sig.binary) or len(self.sets) != len(self.sig.unary):
            raise TwwError("relation data does not match the signature")
        for mat in self.rels:
            if len(mat) != self.n or any(len(row) != self.n for row in mat):
                raise TwwError("relation matrix has wrong dimensions")
        for vec in self.sets:
            if len(vec) != self.n:
                raise TwwError("unary relation has wrong length")

    # construction ------------------------------------------------------
    @classmethod
    def build(cls, sig: Signature, n: int, rels: dict | None = None,
              sets: dict | None = None) -> "OrderedStructure":
        rels = rels or {}
        sets = sets or {}
        unknown = set(rels) - set(sig.binary) | set(sets) - set(sig.unary)
        if unknown:
            raise TwwError(f"unknown symbols {sorted(unknown)}")
        zero = tuple((0,) * n for _ in range(n))
        return cls(sig, n,
                   tuple(_bits(rels[r]) if r in rels else zero for r in sig.binary),
                   tuple(tuple(1 if v else 0 for v in sets[u]) if u in sets else (0,) * n
                         for u in sig.unary))

    @classmethod
    def graph(cls, n: int, edges: Iterable[tuple[int, int]] = ()) -> "OrderedStructure":
        """Loopless undirected ordered graph over the signature ``{E}``."""
        mat = [[0] * n for _ in range(n)]
        for a, b in edges:
            if a == b:
                raise TwwError("ordered graphs are loopless")
            mat[a][b] = mat[b][a] = 1
        return cls(GRAPH, n, (_bits(mat),), ())

    def rel(self, name: str) -> tuple[tuple[int, ...], ...]:
        return self.rels[self.sig.binary.index(name)]

    def unary_set(self, name: str) -> tuple[int, ...]:
        return self.sets[self.sig.unary.index(name)]

    def holds(self, name: str, *args: int) -> bool:
        if name == ORDER_SYMBOL:
            return args[0] <= args[1]
        if len(args) == 2:
            return bool(self.rel(name)[args[0]][args[1]])
        return bool(self.unary_set(name)[args[0]])

    def edges(self, name: str = "E") -> list[tuple[int, int]]:
        mat = self.rel(name)
        return [(a, b) for a in range(self.n) for b in range(a + 1, self.n) if mat[a][b]]

    def is_graph(self) -> bool:
        if self.sig != GRAPH:
            return False
        mat = self.rels[0]
        return all(mat[a][a] == 0 for a in range(self.n)) and all(
            mat[a][b] == mat[b][a] for a in range(self.n) for b in range(a))

    def induced(self, indices: Sequence[int]) -> "OrderedStructure":
        """Induced substructure on ``indices`` (which must be increasing)."""
        idx = list(indices)
        if any(x >= y for x, y in zip(idx, idx[1:])):
            raise TwwError("induced substructure needs strictly increasing indices")
        return self.relabel(idx)

    def relabel(self, order: Sequence[int]) -> "OrderedStructure":
        """Structure whose i-th element is ``order[i]`` of this one."""
        idx = list(order)
        for i in idx:
            if not 0 <= i < self.n:
                raise TwwError(f"index {i} out of range")
        rels = tuple(tuple(tuple(m[a][b] for b in idx) for a in idx) for m in self.rels)
        sets = tuple(tuple(v[a] for a in idx) for v in self.sets)
        return OrderedStructure(self.sig, len(idx), rels, sets)

    # atomic types --------------------------------------------------------
    @cached_property
    def _codes(self) -> tuple[tuple[tuple[int, ...], ...], tuple[AtomicTypeCode, ...]]:
        table: dict[AtomicTypeCode, int] = {}
        rows = []
        for a in range(self.n):
            row = []
            for b in range(self.n):
                code = _atp(self, a, b)
                row.append(table.setdefault(code, len(table)))
            rows.append(tuple(row))
        return tuple(rows), tuple(table)

    @property
    def code_matrix(self) -> tuple[tuple[int, ...], ...]:
        """Adjacency-type matrix with atomic types interned to small ints."""
        return self._codes[0]

    @property
    def code_table(self) -> tuple[AtomicTypeCode, ...]:
        return self._codes[1]

    def type_matrix(self) -> tuple[tuple[AtomicTypeCode, ...], ...]:
        table = self.code_table
        return tuple(tuple(table[c] for c in row) for row in self.code_matrix)


def _atp(S: OrderedStructure, a: int, b: int) -> AtomicTypeCode:
    order = "<" if a < b else ">" if a > b else "="
    return AtomicTypeCode(order,
                          tuple((bool(m[a][b]), bool(m[b][a])) for m in S.rels),
                          tuple((bool(v[a]), bool(v[b])) for v in S.sets))


def atp(S: OrderedStructure, a: int, b: int) -> AtomicTypeCode:
    if not (0 <= a < S.n and 0 <= b < S.n):
        raise TwwError(f"index out of range: ({a}, {b}) for n={S.n}")
    return _atp(S, a, b)


def types_count(S: OrderedStructure, A: Iterable[int], B: Iterable[int]) -> int:
    """Number of distinct joint types of elements of ``A`` over ``B``.

    This is the number of distinct rows of the ``A x B`` block of the
    adjacency-type matrix.
    """
    A, B = sorted(set(A)), sorted(set(B))
    if not A or not B:
        raise TwwError("types_count needs nonempty sets")
    for x in A + B:
        if not 0 <= x < S.n:
            raise TwwError(f"index {x} out of range")
    M = S.code_matrix
    return len({tuple(M[a][b] for b in B) for a in A})


def is_homogeneous(S: OrderedStructure, X: Iterable[int], Y: Iterable[int]) -> bool:
    X, Y = set(X), set(Y)
    if X & Y:
        raise TwwError("homogeneity is defined for disjoint sets")
    return types_count(S, X, Y) == 1 and types_count(S, Y, X) == 1


def _block_constant(M, X: Sequence[int], Y: Sequence[int]) -> bool:
    # for disjoint X, Y this is equivalent to is_homogeneous
    first = M[X[0]][Y[0]]
    return all(M[x][y] == first for x in X for y in Y)


# partitions ------------------------------------------------------------------

Partition = tuple[tuple[int, ...], ...]


def canonical_partition(blocks: Iterable[Iterable[int]]) -> Partition:
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


def check_partition(blocks: Iterable[Iterable[int]], n: int) -> Partition:
    P = canonical_partition(blocks)
    seen = [x for b in P for x in b]
    if any(not b for b in P):
        raise TwwError("partition has an empty block")
    if sorted(seen) != list(range(n)):
        raise TwwError("blocks must be disjoint and cover the domain")
    return P


def red_degree(S: OrderedStructure, P: Iterable[Iterable[int]]) -> int:
    P = check_partition(P, S.n)
    return _red_degree(S.code_matrix, P)


def _red_degree(M, P: Partition) -> int:
    red = [0] * len(P)
    for i, j in combinations(range(len(P)), 2):
        if not _block_constant(M, P[i], P[j]):
            red[i] += 1
            red[j] += 1
    return max(red, default=0)


def intervals(cuts: Sequence[int], n: int) -> list[range]:
    """Intervals of ``0..n-1`` for a convex partition given by its cut positions.

    A cut ``c`` starts a new interval at index ``c``; cuts lie in ``1..n-1``.
    """
    bounds = [0, *cuts, n]
    if any(x >= y for x, y in zip(bounds, bounds[1:])):
        raise TwwError(f"cuts {list(cuts)} do not define a convex partition of {n}")
    return [range(x, y) for x, y in zip(bounds, bounds[1:])]


@dataclass(frozen=True)
class ConvexPartition:
    n: int
    cuts: tuple[int, ...] = ()

    def __post_init__(self):
        intervals(self.cuts, self.n)

    def blocks(self) -> list[range]:
        return intervals(self.cuts, self.n)


# contraction sequences ---------------------------------------------------------

@dataclass(frozen=True)
class ContractionSequence:
    """Bottom-up contraction sequence: ``n - 1`` merges starting from singletons.

    A merge ``(a, b)`` joins the current block containing ``a`` with the one
    containing ``b``; any element of a block may serve as its representative.
    """
    n: int
    merges: tuple[tuple[int, int], ...] = field(default=())

    def partitions(self) -> Iterator[Partition]:
        """Yield the ``n`` partitions from singletons to one block."""
        if self.n == 0:
            return
        if len(self.merges) != self.n - 1:
            raise TwwError(f"expected {self.n - 1} merges, got {len(self.merges)}")
        block_of = list(range(self.n))
        blocks: dict[int, list[int]] = {i: [i] for i in range(self.n)}
        yield canonical_partition(blocks.values())
        for step, (a, b) in enumerate(self.merges):
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise TwwError(f"merge {step}: unknown element in ({a}, {b})")
            x, y = block_of[a], block_of[b]
            if x == y:
                raise TwwError(f"merge {step}: {a} and {b} are already in one block")
            for e in blocks[y]:
                block_of[e] = x
            blocks[x].extend(blocks.pop(y))
            yield canonical_partition(blocks.values())

    def to_text(self, red: int | None = None) -> str:
        lines = [f"merge {a} {b}" for a, b in self.merges]
        if red is not None:
            lines.append(f"# red-degree {red}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, n: int, text: str) -> "ContractionSequence":
        merges = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3 or parts[0] != "merge":
                raise TwwError(f"line {lineno}: expected 'merge a b'")
            merges.append((int(parts[1]), int(parts[2])))
        return cls(n, tuple(merges))


def verify_contraction_sequence(S: OrderedStructure, seq: ContractionSequence) -> int:
    """Maximum red-degree over all partitions of the sequence."""
    if seq.n != S.n:
        raise TwwError("sequence and structure sizes differ")
    M = S.code_matrix
    return max((_red_degree(M, P) for P in seq.partitions()), default=0)


def order_from_contraction(S: OrderedStructure, seq: ContractionSequence) -> list[int]:
    """An order of the domain in which every partition of ``seq`` is convex.

    ``result[i]`` is the element placed at position ``i``. When two blocks are
    merged the one with the smaller minimum is placed first.
    """
    if seq.n != S.n:
        raise TwwError("sequence and structure sizes differ")
    n = seq.n
    if n == 0:
        return []
    block_of = list(range(n))
    seqs: dict[int, list[int]] = {i: [i] for i in range(n)}
    list(seq.partitions())  # validates
    for a, b in seq.merges:
        x, y = block_of[a], block_of[b]
        first, second = (x, y) if min(seqs[x]) < min(seqs[y]) else (y, x)
        merged = seqs.pop(first) + seqs.pop(second)
        for e in merged:
            block_of[e] = first
        seqs[first] = merged
    (order,) = seqs.values()
    return order


def relabel_sequence(seq: ContractionSequence, order: Sequence[int]) -> ContractionSequence:
    """Express ``seq`` in the coordinates of ``S.relabel(order)``."""
    pos = {e: i for i, e in enumerate(order)}
    return ContractionSequence(seq.n, tuple((pos[a], pos[b]) for a, b in seq.merges))


# embeddings ------------------------------------------------------------------

def embeddings(pattern: OrderedStructure, host: OrderedStructure,
               last: int | None = None) -> Iterator[tuple[int, ...]]:
    """Order-preserving induced embeddings of ``pattern`` into ``host``.

    Yielded in lexicographic order. If ``last`` is given, only embeddings
    whose image contains ``last`` are produced.
    """
    if pattern.sig != host.sig:
        raise TwwError("pattern and host signatures differ")
    k = pattern.n
    pt = pattern.type_matrix()
    ht = host.type_matrix()
    chosen: list[int] = []

    def extend(i: int, start: int):
        if i == k:
            if last is None or last in chosen:
                yield tuple(chosen)
            return
        for h in range(start, host.n - (k - i) + 1):
            if ht[h][h] != pt[i][i]:
                continue
            if all(ht[chosen[j]][h] == pt[j][i] for j in range(i)):
                chosen.append(h)
                yield from extend(i + 1, h + 1)
                chosen.pop()

    if k == 0:
        if last is None:
            yield ()
        return
    yield from extend(0, 0)


def contains(host: OrderedStructure, pattern: OrderedStructure) -> bool:
    return next(embeddings(pattern, host), None) is not None


# .obs text format ------------------------------------------------------------

def dumps(S: OrderedStructure) -> str:
    sig = " ".join(f"{name}:{arity}" for name, arity in S.sig.symbols)
    lines = ["obs v1", f"sig {sig}".rstrip(), f"n {S.n}"]
    for name, mat in zip(S.sig.binary, S.rels):
        lines.append(f"rel {name}")
        lines.extend("".join(map(str, row)) for row in mat)
    for name, vec in zip(S.sig.unary, S.sets):
        lines.append(f"set {name}")
        lines.append("".join(map(str, vec)))
    return "\n".join(lines) + "\n"


def loads(text: str) -> OrderedStructure:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "obs v1":
        raise TwwError("not an .obs v1 file")
    if len(lines) < 3 or not lines[1].startswith("sig") or not lines[2].startswith("n "):
        raise TwwError("expected 'sig' and 'n' header lines")
    symbols = []
    for tok in lines[1].split()[1:]:
        name, _, arity = tok.rpartition(":")
        if not name or not arity.isdigit():
            raise TwwError(f"bad symbol declaration {tok!r}")
        symbols.append((name, int(arity)))
    sig = Signature(tuple(symbols))
    n = int(lines[2].split()[1])
    rels, sets = {}, {}
    i = 3

    def row(lineno: int) -> list[int]:
        line = lines[lineno - 1].strip() if lineno <= len(lines) else ""
        if len(line) != n or set(line) - {"0", "1"}:
            raise TwwError(f"line {lineno}: expected {n} characters in {{0,1}}")
        return [int(c) for c in line]

    while i < len(lines):
        head = lines[i].split()
        if not head:
            i += 1
            continue
        if head[0] == "rel" and len(head) == 2:
            rels[head[1]] = [row(i + 2 + r) for r in range(n)]
            i += n + 1
        elif head[0] == "set" and len(head) == 2:
            sets[head[1]] = row(i + 2)
            i += 2
        else:
            raise TwwError(f"line {i + 1}: unexpected {lines[i]!r}")
    missing = (set(sig.binary) - set(rels)) | (set(sig.unary) - set(sets))
    if missing:
        raise TwwError(f"missing data for {sorted(missing)}")
    return OrderedStructure.build(sig, n, rels, sets)


# standard families -------------------------------------------------------------

def ordered_path(n: int) -> OrderedStructure:
    return OrderedStructure.graph(n, [(i, i + 1) for i in range(n - 1)])


def ordered_clique(n: int) -> OrderedStructure:
    return OrderedStructure.graph(n, combinations(range(n), 2))


def all_ordered_graphs(n: int) -> Iterator[OrderedStructure]:
    pairs = list(combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield OrderedStructure.graph(n, [p for i, p in enumerate(pairs) if mask >> i & 1])
