import random
from itertools import combinations

from hypothesis import strategies as st

from twwlab.core import GRAPH, OrderedStructure, Signature


@st.composite
def ordered_graphs(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_n, max_n))
    pairs = list(combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return OrderedStructure.graph(n, [p for p, k in zip(pairs, keep) if k])


DIGRAPH_U = Signature((("E", 2), ("U", 1)))


@st.composite
def structures(draw, min_n=1, max_n=5):
    """Directed relation E (loops allowed) plus a unary U."""
    n = draw(st.integers(min_n, max_n))
    bits = draw(st.lists(st.booleans(), min_size=n * n + n, max_size=n * n + n))
    E = [[int(bits[a * n + b]) for b in range(n)] for a in range(n)]
    U = [int(b) for b in bits[n * n:]]
    return OrderedStructure.build(DIGRAPH_U, n, {"E": E}, {"U": U})


def random_graph(rng: random.Random, n: int, p: float = 0.5) -> OrderedStructure:
    return OrderedStructure.graph(n, [e for e in combinations(range(n), 2) if rng.random() < p])


def random_matrix(rng: random.Random, m: int, n: int, alphabet: int = 2):
    return [[rng.randrange(alphabet) for _ in range(n)] for _ in range(m)]


__all__ = ["GRAPH", "ordered_graphs", "structures", "random_graph", "random_matrix"]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
