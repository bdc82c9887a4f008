"""First-order formulas over ordered structures: syntax, evaluation, interpretations.

Text syntax is a prefix s-expression::

    formula := true | false
             | (not F) | (and F ...) | (or F ...) | (-> F F)
             | (exists VAR F) | (forall VAR F)
             | (exists (VAR ...) F) | (forall (VAR ...) F)
             | (= VAR VAR) | (<= VAR VAR) | (NAME VAR) | (NAME VAR VAR)

``;`` starts a comment running to the end of the line.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable

from twwlab.core import ORDER_SYMBOL, OrderedStructure, Signature, TwwError

DEFAULT_MAX_DEPTH = 4


class DepthBudgetError(TwwError):
    pass


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return to_sexpr(self)


@dataclass(frozen=True, eq=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Rel(Formula):
    """Atom ``name(args)``; ``name`` may be ``"<="`` for the order or ``"="``."""
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


TRUE, FALSE = Const(True), Const(False)


def R(name: str, *args: str) -> Rel:
    return Rel(name, tuple(args))


def Eq(x: str, y: str) -> Rel:
    return Rel("=", (x, y))


def Le(x: str, y: str) -> Rel:
    return Rel(ORDER_SYMBOL, (x, y))


def Lt(x: str, y: str) -> Formula:
    return And((Le(x, y), Not(Eq(x, y))))


def conj(*parts: Formula) -> Formula:
    return And(tuple(parts)) if len(parts) != 1 else parts[0]


def disj(*parts: Formula) -> Formula:
    return Or(tuple(parts)) if len(parts) != 1 else parts[0]


def exists(vars_: str | Iterable[str], body: Formula) -> Formula:
    for v in reversed([vars_] if isinstance(vars_, str) else list(vars_)):
        body = Exists(v, body)
    return body


def forall(vars_: str | Iterable[str], body: Formula) -> Formula:
    for v in reversed([vars_] if isinstance(vars_, str) else list(vars_)):
        body = Forall(v, body)
    return body


# structure of formulas ---------------------------------------------------------

def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not,)):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, Implies):
        return (f.left, f.right)
    if isinstance(f, (Exists, Forall)):
        return (f.body,)
    return ()


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Rel):
        return frozenset(f.args)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    out = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def quantifier_depth(f: Formula) -> int:
    own = 1 if isinstance(f, (Exists, Forall)) else 0
    return own + max((quantifier_depth(c) for c in children(f)), default=0)


def is_quantifier_free(f: Formula) -> bool:
    return quantifier_depth(f) == 0


def symbols(f: Formula) -> set[tuple[str, int]]:
    if isinstance(f, Rel):
        return set() if f.name in ("=", ORDER_SYMBOL) else {(f.name, len(f.args))}
    out = set()
    for c in children(f):
        out |= symbols(c)
    return out


_fresh = itertools.count()


def fresh(prefix: str = "_z") -> str:
    return f"{prefix}{next(_fresh)}"


def substitute(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename free variables; every bound variable gets a fresh name."""
    if isinstance(f, Const):
        return f
    if isinstance(f, Rel):
        return Rel(f.name, tuple(mapping.get(a, a) for a in f.args))
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, (Exists, Forall)):
        v = fresh()
        return type(f)(v, substitute(f.body, {**mapping, f.var: v}))
    raise TwwError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class Template:
    """Formula with named parameters, instantiated by capture-free renaming."""
    params: tuple[str, ...]
    body: Formula

    def __call__(self, *args: str) -> Formula:
        if len(args) != len(self.params):
            raise TwwError(f"expected {len(self.params)} arguments, got {len(args)}")
        return substitute(self.body, dict(zip(self.params, args)))


def template(params: str, build: Callable[..., Formula]) -> Template:
    names = tuple(params.split())
    return Template(names, build(*names))


# evaluation ------------------------------------------------------------------

class Evaluator:
    """Brute-force evaluator memoized on (subformula, values of its free variables)."""

    def __init__(self, S: OrderedStructure):
        self.S = S
        self._memo: dict = {}
        self._fv: dict[int, tuple[str, ...]] = {}
        self._keep: list = []

    def _free(self, f: Formula) -> tuple[str, ...]:
        got = self._fv.get(id(f))
        if got is None:
            got = self._fv[id(f)] = tuple(sorted(free_vars(f)))
            self._keep.append(f)
        return got

    def eval(self, f: Formula, env: dict[str, int]) -> bool:
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Rel):
            return self._atom(f, env)
        if isinstance(f, Not):
            return not self.eval(f.body, env)
        if isinstance(f, And):
            return all(self.eval(p, env) for p in f.parts)
        if isinstance(f, Or):
            return any(self.eval(p, env) for p in f.parts)
        if isinstance(f, Implies):
            return not self.eval(f.left, env) or self.eval(f.right, env)
        if isinstance(f, (Exists, Forall)):
            fv = self._free(f)
            key = (id(f), tuple(env[v] for v in fv))
            got = self._memo.get(key)
            if got is None:
                inner = dict(env)
                want = isinstance(f, Exists)
                got = not want
                for a in range(self.S.n):
                    inner[f.var] = a
                    if self.eval(f.body, inner) == want:
                        got = want
                        break
                self._memo[key] = got
            return got
        raise TwwError(f"not a formula: {f!r}")

    def _atom(self, f: Rel, env: dict[str, int]) -> bool:
        try:
            vals = [env[a] for a in f.args]
        except KeyError as e:
            raise TwwError(f"unbound variable {e.args[0]!r}") from None
        if f.name == "=":
            return vals[0] == vals[1]
        if f.name == ORDER_SYMBOL:
            return vals[0] <= vals[1]
        if self.S.sig.arity(f.name) != len(vals):
            raise TwwError(f"{f.name} has arity {self.S.sig.arity(f.name)}, used with {len(vals)}")
        return self.S.holds(f.name, *vals)


def evaluate(S: OrderedStructure, phi: Formula, asg: dict[str, int] | None = None,
             max_depth: int | None = DEFAULT_MAX_DEPTH) -> bool:
    """Truth of ``phi`` in ``S`` under ``asg``.

    ``max_depth`` caps the quantifier depth (None lifts the cap).
    """
    asg = dict(asg or {})
    missing = free_vars(phi) - set(asg)
    if missing:
        raise TwwError(f"unbound free variables {sorted(missing)}")
    for name, arity in symbols(phi):
        if S.sig.arity(name) != arity:
            raise TwwError(f"{name} has arity {S.sig.arity(name)}, used with {arity}")
    if max_depth is not None and quantifier_depth(phi) > max_depth:
        raise DepthBudgetError(f"quantifier depth {quantifier_depth(phi)} exceeds budget {max_depth}")
    for v, a in asg.items():
        if not 0 <= a < S.n:
            raise TwwError(f"{v} = {a} outside the domain")
    return Evaluator(S).eval(phi, asg)


# s-expression syntax -----------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse(text: str) -> Formula:
    text = re.sub(r";[^\n]*", "", text)
    tokens = _TOKEN.findall(text)
    pos = 0

    def expr():
        nonlocal pos
        if pos >= len(tokens):
            raise TwwError("unexpected end of formula")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise TwwError("unexpected ')'")
        if tok != "(":
            if tok == "true":
                return TRUE
            if tok == "false":
                return FALSE
            raise TwwError(f"unexpected token {tok!r}")
        head = tokens[pos]
        pos += 1
        if head in ("not", "and", "or", "->"):
            args = []
            while tokens[pos] != ")":
                args.append(expr())
            pos += 1
            if head == "not":
                if len(args) != 1:
                    raise TwwError("not takes one argument")
                return Not(args[0])
            if head == "->":
                if len(args) != 2:
                    raise TwwError("-> takes two arguments")
                return Implies(*args)
            return (And if head == "and" else Or)(tuple(args))
        if head in ("exists", "forall"):
            if tokens[pos] == "(":
                pos += 1
                vs = []
                while tokens[pos] != ")":
                    vs.append(tokens[pos])
                    pos += 1
                pos += 1
            else:
                vs = [tokens[pos]]
                pos += 1
            body = expr()
            if tokens[pos] != ")":
                raise TwwError(f"expected ')' after {head} body")
            pos += 1
            return (exists if head == "exists" else forall)(vs, body)
        args = []
        while pos < len(tokens) and tokens[pos] not in ("(", ")"):
            args.append(tokens[pos])
            pos += 1
        if pos >= len(tokens) or tokens[pos] != ")":
            raise TwwError(f"atom {head} takes variables only")
        pos += 1
        if head in ("=", ORDER_SYMBOL) and len(args) != 2:
            raise TwwError(f"{head} takes two variables")
        if not 1 <= len(args) <= 2:
            raise TwwError(f"atom {head} must have one or two variables")
        return Rel(head, tuple(args))

    try:
        f = expr()
    except IndexError:
        raise TwwError("unbalanced parentheses") from None
    if pos != len(tokens):
        raise TwwError("trailing input after formula")
    return f


def to_sexpr(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Rel):
        return f"({f.name} {' '.join(f.args)})"
    if isinstance(f, Not):
        return f"(not {to_sexpr(f.body)})"
    if isinstance(f, And):
        return "(and" + "".join(" " + to_sexpr(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or" + "".join(" " + to_sexpr(p) for p in f.parts) + ")"
    if isinstance(f, Implies):
        return f"(-> {to_sexpr(f.left)} {to_sexpr(f.right)})"
    if isinstance(f, Exists):
        return f"(exists {f.var} {to_sexpr(f.body)})"
    if isinstance(f, Forall):
        return f"(forall {f.var} {to_sexpr(f.body)})"
    raise TwwError(f"not a formula: {f!r}")


# interpretations -------------------------------------------------------------

@dataclass
class Interpretation:
    """Domain formula over ``x`` plus one template per target symbol.

    If ``order`` is None the target inherits the source order on the domain;
    otherwise ``order(x, y)`` must define a total order on it.
    """
    source: Signature
    target: Signature
    delta: Template
    formulas: dict[str, Template]
    order: Template | None = None

    def __post_init__(self):
        if ORDER_SYMBOL in self.formulas:
            raise TwwError("give the order through the order template, not as a symbol")
        for name, arity in self.target.symbols:
            if name not in self.formulas:
                raise TwwError(f"no formula for target symbol {name}")
            if len(self.formulas[name].params) != arity:
                raise TwwError(f"formula for {name} must have {arity} parameters")


@dataclass
class InterpretationResult:
    structure: OrderedStructure
    domain: list[int]  # source element behind each target element
    empty: bool = field(default=False)


def apply_interpretation(I: Interpretation, S: OrderedStructure,
                         forbid_empty: bool = False) -> InterpretationResult:
    ev = Evaluator(S)
    x, y = "_x", "_y"
    delta = I.delta(x)
    D = [a for a in range(S.n) if ev.eval(delta, {x: a})]
    if not D and forbid_empty:
        raise TwwError("interpretation has an empty domain")
    if I.order is not None:
        le = I.order(x, y)
        for a in D:
            for b in D:
                if a != b and ev.eval(le, {x: a, y: b}) == ev.eval(le, {x: b, y: a}):
                    raise TwwError("order formula is not a total order on the domain")
        before = {a: sum(ev.eval(le, {x: b, y: a}) for b in D) for a in D}
        D.sort(key=before.__getitem__)
    rels, sets = {}, {}
    for name in I.target.binary:
        phi = I.formulas[name](x, y)
        rels[name] = [[int(ev.eval(phi, {x: a, y: b})) for b in D] for a in D]
    for name in I.target.unary:
        phi = I.formulas[name](x)
        sets[name] = [int(ev.eval(phi, {x: a})) for a in D]
    return InterpretationResult(OrderedStructure.build(I.target, len(D), rels, sets), D, not D)


def compose(I2: Interpretation, I1: Interpretation) -> Interpretation:
    """Interpretation equal to applying I1, then I2 (both with inherited order)."""
    if I1.order is not None or I2.order is not None:
        raise TwwError("composition needs inherited orders")
    if I2.source != I1.target:
        raise TwwError("signatures do not chain")

    def lift(f: Formula) -> Formula:
        # rewrite an I1-target formula into the I1 source, relativized to delta1
        if isinstance(f, Const):
            return f
        if isinstance(f, Rel):
            if f.name in ("=", ORDER_SYMBOL):
                return f
            return I1.formulas[f.name](*f.args)
        if isinstance(f, Not):
            return Not(lift(f.body))
        if isinstance(f, And):
            return And(tuple(lift(p) for p in f.parts))
        if isinstance(f, Or):
            return Or(tuple(lift(p) for p in f.parts))
        if isinstance(f, Implies):
            return Implies(lift(f.left), lift(f.right))
        if isinstance(f, Exists):
            return Exists(f.var, And((I1.delta(f.var), lift(f.body))))
        if isinstance(f, Forall):
            return Forall(f.var, Implies(I1.delta(f.var), lift(f.body)))
        raise TwwError(f"not a formula: {f!r}")

    delta = Template(("x",), And((I1.delta("x"), lift(I2.delta("x")))))
    formulas = {name: Template(t.params, lift(t.body)) for name, t in I2.formulas.items()}
    return Interpretation(I1.source, I2.target, delta, formulas)


def identity_interpretation(sig: Signature) -> Interpretation:
    formulas = {}
    for name, arity in sig.symbols:
        params = ("x", "y")[:arity]
        formulas[name] = Template(params, Rel(name, params))
    return Interpretation(sig, sig, Template(("x",), TRUE), formulas)


# grids defined by formulas -----------------------------------------------------

@dataclass
class GridDefinition:
    """phi(xs; ys; z) together with candidate sets A (xs-tuples), B (ys-tuples), C."""
    phi: Formula
    xs: tuple[str, ...]
    ys: tuple[str, ...]
    z: str
    A: list[tuple[int, ...]]
    B: list[tuple[int, ...]]
    C: list[int]

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return len(self.B)

    def holds(self, ev: Evaluator, a, b, c) -> bool:
        env = dict(zip(self.xs, a))
        env.update(zip(self.ys, b))
        env[self.z] = c
        return ev.eval(self.phi, env)

    def cell_map(self, S: OrderedStructure) -> dict | None:
        """(i, j) -> c if phi restricted to A x B x C is a bijection, else None."""
        ev = Evaluator(S)
        if len(self.C) != len(self.A) * len(self.B) or len(set(self.C)) != len(self.C):
            return None
        hits: dict[int, list] = {c: [] for c in self.C}
        out = {}
        for i, a in enumerate(self.A):
            for j, b in enumerate(self.B):
                cs = [c for c in self.C if self.holds(ev, a, b, c)]
                if len(cs) != 1:
                    return None
                out[i, j] = cs[0]
                for c in cs:
                    hits[c].append((i, j))
        if any(len(v) != 1 for v in hits.values()):
            return None
        return out


def verify_defined_grid(S: OrderedStructure, g: GridDefinition) -> bool:
    return g.cell_map(S) is not None


# the universal interpretation of semigrids ----------------------------------------

BIPARTITE = Signature((("E", 2), ("Row", 1), ("Col", 1)))


def bipartite_graph(m: int, n: int, cells) -> OrderedStructure:
    """Ordered bipartite graph: columns 1..n first, then rows 1..m; E goes row -> column."""
    N = m + n
    E = [[0] * N for _ in range(N)]
    for i, j in cells:
        if not (1 <= i <= m and 1 <= j <= n):
            raise TwwError(f"cell ({i}, {j}) outside 1..{m} x 1..{n}")
        E[n + i - 1][j - 1] = 1
    return OrderedStructure.build(BIPARTITE, N, {"E": E},
                                  {"Row": [0] * n + [1] * m, "Col": [1] * n + [0] * m})


def bipartite_cells(H: OrderedStructure) -> tuple[int, int, frozenset]:
    """Inverse of ``bipartite_graph``; checks the layout."""
    if H.sig != BIPARTITE:
        raise TwwError("expected the bipartite signature E:2 Row:1 Col:1")
    rows, cols = H.unary_set("Row"), H.unary_set("Col")
    n = sum(cols)
    m = H.n - n
    if list(cols) != [1] * n + [0] * m or list(rows) != [0] * n + [1] * m:
        raise TwwError("columns must come first, then rows, each element in one part")
    cells = set()
    for a in range(H.n):
        for b in range(H.n):
            if H.holds("E", a, b):
                if not (rows[a] and cols[b]):
                    raise TwwError("edges must go from a row to a column")
                cells.add((a - n + 1, b + 1))
    return m, n, frozenset(cells)


@dataclass(frozen=True)
class SemigridFormulas:
    phi_C: Template
    phi_R: Template
    pi1: Template
    pi2: Template
    rho: Template
    delta: Template


def _star(x):
    return Forall("w", Le(x, "w"))


def _succ(x, y):
    return conj(Lt(x, y), Not(exists("w", conj(Lt(x, "w"), Lt("w", y)))))


def semigrid_formulas(scheme) -> SemigridFormulas:
    """Formulas locating columns, rows and cells of G^S.

    Supported for schemes with I_0 first and independent; other schemes are
    reduced to these by reversing the order or complementing edges, which
    leaves the family of 256 schemes.
    """
    if scheme.orient != "<" or scheme.clique:
        raise TwwError("universal interpretation needs a scheme with I_0 first and independent")
    r = scheme.rtype
    E = lambda a, b: Rel("E", (a, b))  # noqa: E731

    def smallest_neighbor(s, t):
        return conj(E(s, t), forall("w", Implies(E(s, "w"), Le(t, "w"))))

    if r == "!=":
        phi_C = template("x", lambda x: exists(("s", "u", "t"), conj(
            _star("s"), _succ("s", "u"), smallest_neighbor("u", "t"), Lt("s", x), Lt(x, "t"))))
    else:
        phi_C = template("x", lambda x: exists(("s", "t"), conj(
            _star("s"), smallest_neighbor("s", "t"), Lt("s", x), Lt(x, "t"))))

    if r in ("=", ">="):
        phi_R = template("x", lambda x: exists("s", conj(_star("s"), E("s", x))))
    elif r == "<=":
        phi_R = template("x", lambda x: exists(("s", "u"), conj(
            _star("s"), _succ("s", "u"), E("s", x), Not(E("u", x)))))
    else:
        phi_R = template("x", lambda x: conj(
            Not(phi_C(x)), Not(_star(x)), Not(exists("s", conj(_star("s"), E("s", x))))))

    # x lies in the row of y: after y and before the next row representative
    pi1 = template("x y", lambda x, y: conj(
        phi_R(y), Lt(y, x), forall("w", Implies(conj(phi_R("w"), Lt(y, "w")), Lt(x, "w")))))

    if r == "=":
        col = lambda x, y: E(x, y)  # noqa: E731
    elif r == "!=":
        col = lambda x, y: Not(E(x, y))  # noqa: E731
    elif r == "<=":
        # y is the largest column adjacent to x
        col = lambda x, y: conj(E(x, y), forall("w", Implies(conj(phi_C("w"), Lt(y, "w")), Not(E(x, "w")))))  # noqa: E731
    else:
        # x is adjacent to y but not to the predecessor of y
        col = lambda x, y: conj(E(x, y), forall("p", Implies(_succ("p", y), Not(E(x, "p")))))  # noqa: E731
    pi2 = template("x y", lambda x, y: conj(phi_C(y), col(x, y)))
    rho = template("x y", lambda x, y: conj(phi_R(x), phi_C(y), exists("z", conj(pi1("z", x), pi2("z", y)))))
    delta = template("x", lambda x: disj(phi_R(x), phi_C(x)))
    return SemigridFormulas(phi_C, phi_R, pi1, pi2, rho, delta)


def universal_interpretation(scheme) -> Interpretation:
    """Interpretation taking G^S to the ordered bipartite graph of S."""
    from twwlab.core import GRAPH

    f = semigrid_formulas(scheme)
    return Interpretation(GRAPH, BIPARTITE, f.delta,
                          {"E": f.rho, "Row": f.phi_R, "Col": f.phi_C})


def relativize(phi: Formula, delta: Template, atoms: dict[str, Template]) -> Formula:
    """Replace atoms by templates and bound quantifiers to delta."""
    if isinstance(phi, Const):
        return phi
    if isinstance(phi, Rel):
        if phi.name in ("=", ORDER_SYMBOL):
            return phi
        if phi.name not in atoms:
            raise TwwError(f"unknown symbol {phi.name!r}")
        return atoms[phi.name](*phi.args)
    if isinstance(phi, Not):
        return Not(relativize(phi.body, delta, atoms))
    if isinstance(phi, And):
        return And(tuple(relativize(p, delta, atoms) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(relativize(p, delta, atoms) for p in phi.parts))
    if isinstance(phi, Implies):
        return Implies(relativize(phi.left, delta, atoms), relativize(phi.right, delta, atoms))
    if isinstance(phi, Exists):
        return Exists(phi.var, And((delta(phi.var), relativize(phi.body, delta, atoms))))
    if isinstance(phi, Forall):
        return Forall(phi.var, Implies(delta(phi.var), relativize(phi.body, delta, atoms)))
    raise TwwError(f"not a formula: {phi!r}")


def mc_reduce(phi: Formula, H: OrderedStructure, scheme) -> tuple[Formula, OrderedStructure]:
    """Sentence and ordered graph G^S with H |= phi iff G^S |= result."""
    from twwlab.semigrid import generate_GS

    if free_vars(phi):
        raise TwwError(f"sentence has free variables {sorted(free_vars(phi))}")
    m, n, cells = bipartite_cells(H)
    f = semigrid_formulas(scheme)
    G = generate_GS(scheme, m, n, cells)
    return relativize(phi, f.delta, {"E": f.rho, "Row": f.phi_R, "Col": f.phi_C}), G
