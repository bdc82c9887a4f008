"""Acceptance suite: one test per criterion, each printing a PASS or FAIL line.

Criteria that cannot hold as literally stated are still checked literally,
marked strict xfail, and paired with a passing test of the reading that does
hold. The verdict lines are also collected into the terminal summary.
"""
import math
import random
import time
from itertools import combinations, permutations

import pytest

from twwlab.builder import BuildParams, algo_cor, approx_twinwidth
from twwlab.census import build_Gpi, count_GS_family, generate_Hpi, growth_conjecture_sum
from twwlab.core import (
    ContractionSequence,
    GRAPH,
    OrderedStructure,
    all_ordered_graphs,
    ordered_clique,
    types_count,
)
from twwlab.exact import is_kt_simple, twinwidth_exact
from twwlab.logic import (
    apply_interpretation,
    bipartite_graph,
    evaluate,
    mc_reduce,
    universal_interpretation,
)
from twwlab.minors import (
    MixedMinorWitness,
    find_mixed_minor,
    search_grid_minor,
    search_mixed_minor,
    validate_grid_witness,
    validate_mixed_witness,
)
from twwlab.semigrid import (
    DIRECTIONS,
    PairColoring,
    Scheme,
    classify_regular_semigrid,
    decode_GS,
    enumerate_schemes,
    generate_GS,
    generate_semigrid,
    homogenize_grid,
    random_cells,
)

from conftest import random_matrix
from test_logic import random_formula

RTYPES = ("<=", ">=", "=", "!=")

# pinned budgets in seconds, one per criterion that states one
BUDGET = {1: 1, 2: 300, 3: 300, 4: 120, 5: 120, 6: 180, 7: 60, 8: 1, 9: 60, 10: 1,
          11: 300, 12: 300, 13: 10}

RESULTS: list[str] = []


def verdict(num: int, ok: bool, detail: str, elapsed: float | None = None) -> None:
    timing = "" if elapsed is None else f" [{elapsed:.2f}s]"
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}{timing}"
    RESULTS.append(line)
    print(line)
    assert ok, line


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


# independent checkers ---------------------------------------------------------

def zones(rc, cc, m, n):
    rb, cb = [0, *rc, m], [0, *cc, n]
    return [(range(rb[i], rb[i + 1]), range(cb[j], cb[j + 1]))
            for i in range(len(rb) - 1) for j in range(len(cb) - 1)]


def rows_of(M, R, C):
    return len({tuple(M[r][c] for c in C) for r in R})


def cols_of(M, R, C):
    return len({tuple(M[r][c] for r in R) for c in C})


def brute_grid(M, t):
    m, n = len(M), len(M[0])
    return any(all(any(M[r][c] for r in R for c in C) for R, C in zones(rc, cc, m, n))
               for rc in combinations(range(1, m), t - 1) for cc in combinations(range(1, n), t - 1))


def brute_mixed(M, k, t):
    m, n = len(M), len(M[0])
    return any(all(rows_of(M, R, C) >= k or cols_of(M, R, C) >= k for R, C in zones(rc, cc, m, n))
               for rc in combinations(range(1, m), t - 1) for cc in combinations(range(1, n), t - 1))


def check_mixed(M, w) -> bool:
    m, n = len(M), len(M[0])
    if len(w.row_cuts) != w.t - 1 or len(w.col_cuts) != w.t - 1:
        return False
    if list(w.row_cuts) != sorted(set(w.row_cuts)) or list(w.col_cuts) != sorted(set(w.col_cuts)):
        return False
    if not all(0 < c < m for c in w.row_cuts) or not all(0 < c < n for c in w.col_cuts):
        return False
    return all(rows_of(M, R, C) >= w.k or cols_of(M, R, C) >= w.k
               for R, C in zones(w.row_cuts, w.col_cuts, m, n))


def check_grid(M, w) -> bool:
    m, n = len(M), len(M[0])
    zs = zones(w.row_cuts, w.col_cuts, m, n)
    return len(zs) == w.t * w.t and all(
        r in R and c in C and M[r][c] for (R, C), (r, c) in zip(zs, w.cells))


def red_degree_of(S: OrderedStructure, seq: ContractionSequence) -> int:
    """Replay the merges and recount red edges from the type-code matrix."""
    M = S.code_matrix
    blocks = [[x] for x in range(S.n)]
    worst = 0

    def homogeneous(X, Y):
        return len({M[x][y] for x in X for y in Y}) == 1 and len({M[y][x] for x in X for y in Y}) == 1

    def measure():
        return max((sum(not homogeneous(X, Y) for Y in blocks if Y is not X) for X in blocks), default=0)

    worst = measure()
    for a, b in seq.merges:
        X = next(B for B in blocks if a in B)
        Y = next(B for B in blocks if b in B)
        assert X is not Y
        blocks.remove(Y)
        X.extend(Y)
        worst = max(worst, measure())
    assert len(blocks) <= 1
    return worst


def alternating_biclique(t):
    evens, odds = range(0, 2 * t, 2), range(1, 2 * t, 2)
    return OrderedStructure.graph(2 * t, [tuple(sorted((a, b))) for a in evens for b in odds])


# criteria ---------------------------------------------------------------------

def test_criterion_01_scheme_count():
    with Clock() as c:
        schemes = list(enumerate_schemes(GRAPH))
    ok = len(schemes) == 256 == len(set(schemes)) and c.elapsed < BUDGET[1]
    verdict(1, ok, f"{len(schemes)} schemes of ordered graphs", c.elapsed)


def test_criterion_02_oracle_soundness_and_dichotomy():
    graphs = [G for n in range(6) for G in all_ordered_graphs(n)]
    bad = []
    runs = witnesses = 0
    with Clock() as c:
        for G in graphs:
            exact, _ = twinwidth_exact(G)
            res = approx_twinwidth(G)
            if red_degree_of(G, res.sequence) != res.red_degree or res.red_degree < exact:
                bad.append(("approx", G))
            if G.n < 2:
                continue
            for profile in ("exp8", "root1"):
                for k in (1, 2):
                    for t in (1, 2):
                        out = algo_cor(G, k, t, BuildParams(k, t, mt_profile=profile))
                        runs += 1
                        if isinstance(out, ContractionSequence):
                            ok = len(out.merges) == G.n - 1
                            red_degree_of(G, out)
                        else:
                            witnesses += 1
                            ok = (isinstance(out, MixedMinorWitness) and (out.k, out.t) == (k, t)
                                  and check_mixed(G.code_matrix, out))
                        if not ok:
                            bad.append((profile, k, t, G))
    ok = not bad and len(graphs) == 1 + 1 + 2 + 8 + 64 + 1024 and c.elapsed < BUDGET[2]
    verdict(2, ok, f"{len(graphs)} ordered graphs n<=5: approx >= exact; {runs} algo runs, "
                   f"{witnesses} witnesses re-validated; {len(bad)} failures", c.elapsed)


@pytest.mark.xfail(strict=True, reason="index shift points the wrong way; see the corrected test below")
def test_criterion_03_simplicity_minor_link_literal():
    checked = failures = 0
    with Clock() as c:
        for n in range(6):
            for G in all_ordered_graphs(n):
                for k in (1, 2):
                    for t in (2, 3):
                        if t > n or is_kt_simple(G, k + 1, t) is not True:
                            continue
                        checked += 1
                        if find_mixed_minor(G.code_matrix, k, t) is not None:
                            failures += 1
    verdict(3, failures == 0, f"is_kt_simple(S,k+1,t) => no (k,t)-mixed minor: "
                              f"{failures} of {checked} implications fail", c.elapsed)


def test_criterion_03_simplicity_minor_link_corrected():
    checked = failures = 0
    with Clock() as c:
        for n in range(6):
            for G in all_ordered_graphs(n):
                M = G.code_matrix
                for k in (1, 2):
                    for t in (2, 3):
                        if t > n or is_kt_simple(G, k, t) is not True:
                            continue
                        checked += 1
                        if find_mixed_minor(M, k + 1, t) is not None or brute_mixed(M, k + 1, t):
                            failures += 1
    ok = failures == 0 and checked > 0 and c.elapsed < BUDGET[3]
    verdict(3, ok, f"(corrected) is_kt_simple(S,k,t) => no (k+1,t)-mixed minor: "
                   f"{checked} implications, {failures} failures", c.elapsed)


@pytest.mark.xfail(strict=True, reason="distinct inputs generate identical structures; see decisions ledger")
def test_criterion_04_semigrid_round_trip_literal():
    rng = random.Random(4)
    dec_bad = dec_total = cls_bad = cls_total = 0
    with Clock() as c:
        for s in enumerate_schemes():
            for m in range(1, 5):
                for n in range(1, 5):
                    cls_total += 1
                    if classify_regular_semigrid(generate_semigrid(s, m, n)) != (s, m, n):
                        cls_bad += 1
                    for _ in range(10):
                        S = random_cells(rng, m, n)
                        dec_total += 1
                        if decode_GS(generate_GS(s, m, n, S), s) != (m, n, S):
                            dec_bad += 1
    verdict(4, dec_bad == cls_bad == 0,
            f"decode not identity on {dec_bad}/{dec_total}, classify not identity on "
            f"{cls_bad}/{cls_total}", c.elapsed)


def test_criterion_04_semigrid_round_trip_up_to_equality():
    rng = random.Random(4)
    bad = total = 0
    with Clock() as c:
        for s in enumerate_schemes():
            for m in range(1, 5):
                for n in range(1, 5):
                    G = generate_semigrid(s, m, n)
                    got = classify_regular_semigrid(G)
                    total += 1
                    bad += got is None or generate_semigrid(*got) != G
                    for _ in range(10):
                        S = random_cells(rng, m, n)
                        H = generate_GS(s, m, n, S)
                        m2, n2, S2 = decode_GS(H, s)
                        total += 1
                        bad += generate_GS(s, m2, n2, S2) != H
    ok = bad == 0 and c.elapsed < BUDGET[4]
    verdict(4, ok, f"(corrected) generate(decode(G)) == G and generate(classify(G)) == G "
                   f"on {total} cases, {bad} failures", c.elapsed)


def test_criterion_05_interpretation_fidelity():
    rng = random.Random(5)
    bad = total = 0
    with Clock() as c:
        for r in RTYPES:
            for m in range(1, 4):
                for n in range(1, 4):
                    for _ in range(20):
                        s = Scheme(r, "<", False, {d for d in DIRECTIONS if rng.random() < 0.5})
                        S = random_cells(rng, m, n)
                        got = apply_interpretation(universal_interpretation(s), generate_GS(s, m, n, S))
                        total += 1
                        bad += got.structure != bipartite_graph(m, n, S)
    ok = bad == 0 and c.elapsed < BUDGET[5]
    verdict(5, ok, f"I_sigma(G^S) == bipartite graph of S on {total} cases, {bad} failures", c.elapsed)


def test_criterion_06_mc_reduction():
    rng = random.Random(6)
    bad = 0
    values = set()
    with Clock() as c:
        for _ in range(100):
            phi = random_formula(rng, 2, [])
            s = Scheme(rng.choice(RTYPES), "<", False, {d for d in DIRECTIONS if rng.random() < 0.5})
            m, n = rng.randint(1, 3), rng.randint(1, 3)
            H = bipartite_graph(m, n, random_cells(rng, m, n))
            psi, G = mc_reduce(phi, H, s)
            a, b = evaluate(H, phi), evaluate(G, psi, max_depth=None)
            values.add(a)
            bad += a != b
    ok = bad == 0 and values == {True, False} and c.elapsed < BUDGET[6]
    verdict(6, ok, f"100 random depth<=2 sentences agree on H and G^S, {bad} failures", c.elapsed)


def test_criterion_07_counting_injection():
    with Clock() as c:
        counts = [count_GS_family(k) for k in range(1, 6)]
    ok = counts == [math.factorial(k) for k in range(1, 6)] and c.elapsed < BUDGET[7]
    verdict(7, ok, f"distinct G^S over k x k permutation matrices: {counts}", c.elapsed)


def growth_oracle(n: int) -> int:
    # binomials from Pascal's triangle, factorials by running product
    row = [1]
    for _ in range(n):
        row = [a + b for a, b in zip([0] + row, row + [0])]
    total, fact = 0, 1
    for k in range(n // 2 + 1):
        if k:
            fact *= k
        total += row[2 * k] * fact
    return total


def test_criterion_08_growth_sum():
    with Clock() as c:
        got = [growth_conjecture_sum(n) for n in range(21)]
        want = [growth_oracle(n) for n in range(21)]
    ok = got == want and (got[0], got[2], got[4]) == (1, 2, 9) and c.elapsed < BUDGET[8]
    verdict(8, ok, f"n=0..20 match the oracle, n=0,2,4 give {got[0]}, {got[2]}, {got[4]}; "
                   f"n=20 gives {got[20]}", c.elapsed)


def test_criterion_09_hpi_bridge():
    bad = total = 0
    with Clock() as c:
        for n in range(1, 5):
            for pi in permutations(range(1, n + 1)):
                for scheme in (Scheme("=", "<", False), Scheme("=", ">", False, {"right", "down"})):
                    total += 1
                    bad += build_Gpi(pi, scheme) != generate_Hpi(pi)
    ok = bad == 0 and c.elapsed < BUDGET[9]
    verdict(9, ok, f"G_pi == H(pi) for all permutations n<=4 ({total} cases), {bad} failures", c.elapsed)


def test_criterion_10_alternating_biclique():
    failures = pairs = 0
    with Clock() as c:
        for t in range(1, 5):
            G = alternating_biclique(t)
            M = G.code_matrix
            parts = [range(2 * i, 2 * i + 2) for i in range(t)]
            for L in parts:
                for R in parts:
                    pairs += 1
                    lr, rl = types_count(G, L, R), types_count(G, R, L)
                    ind = rows_of(M, L, R), rows_of(M, R, L)
                    if not (lr > 1 and rl > 1) or (lr, rl) != ind:
                        failures += 1
    ok = failures == 0 and c.elapsed < BUDGET[10]
    verdict(10, ok, f"{pairs} part pairs of K_t,t (t<=4) all fail 1-simplicity both ways", c.elapsed)


def test_criterion_11_semigrid_trend():
    ne = Scheme("!=", "<", False)
    with Clock() as c:
        used = [approx_twinwidth(generate_semigrid(ne, m, m), "root1").k_used for m in (3, 5, 7)]
        cliques = [approx_twinwidth(ordered_clique((m + 1) ** 2), "root1").k_used for m in (3, 5, 7)]
    ok = used == sorted(used) and all(a > b for a, b in zip(used, cliques)) and c.elapsed < BUDGET[11]
    verdict(11, ok, f"kUsed (root1 profile) on '!='-semigrids 3,5,7: {used}; same-size cliques: "
                    f"{cliques}", c.elapsed)


def test_criterion_12_witness_validity():
    rng = random.Random(12)
    witnesses = nones = bad = 0
    with Clock() as c:
        for _ in range(500):
            m, n = rng.randint(1, 12), rng.randint(1, 12)
            if rng.random() < 0.5:
                t = rng.randint(1, min(m, n, 4))
                M = random_matrix(rng, m, n)
                M = [[int(rng.random() < 0.3) & v for v in row] for row in M]
                res = search_grid_minor(M, t)
                if res.witness is not None:
                    witnesses += 1
                    bad += not (validate_grid_witness(M, res.witness) and check_grid(M, res.witness))
                elif res.exhaustive:
                    nones += 1
                    bad += brute_grid(M, t)
            else:
                t = rng.randint(1, min(m, n, 3))
                k = rng.randint(1, 4)
                M = random_matrix(rng, m, n, rng.choice([2, 3]))
                res = search_mixed_minor(M, k, t)
                if res.witness is not None:
                    witnesses += 1
                    bad += not (validate_mixed_witness(M, res.witness) and check_mixed(M, res.witness))
                elif res.exhaustive:
                    nones += 1
                    bad += brute_mixed(M, k, t)
    ok = bad == 0 and witnesses > 0 and nones > 0 and c.elapsed < BUDGET[12]
    verdict(12, ok, f"500 random matrices: {witnesses} witnesses re-validated, {nones} exhaustive "
                    f"None answers confirmed by brute force, {bad} failures", c.elapsed)


def homogeneous(table, rows, cols) -> bool:
    pts = [(i, j) for i in rows for j in cols]
    seen = {}
    for p in pts:
        for q in pts:
            key = ((p[0] > q[0]) - (p[0] < q[0]), (p[1] > q[1]) - (p[1] < q[1]))
            if seen.setdefault(key, table(p, q)) != table(p, q):
                return False
    return True


def test_criterion_13_homogenizer():
    rng = random.Random(13)
    found = bad = 0
    with Clock() as c:
        for size in (3, 4, 5, 6):
            full = (tuple(range(size)), tuple(range(size)))
            bad += homogenize_grid(PairColoring(size, size, lambda p, q: 7), size, size) != full
        for _ in range(40):
            table = {}

            def color(p, q, table=table):
                if (p, q) not in table:
                    table[p, q] = rng.randrange(2)
                return table[p, q]

            got = homogenize_grid(PairColoring(5, 5, color), 2, 2)
            if got is not None:
                found += 1
                bad += not homogeneous(color, *got)
    ok = bad == 0 and found > 0 and c.elapsed < BUDGET[13]
    verdict(13, ok, f"constant colorings give the full grid; {found}/40 random outputs pass the "
                    f"independent homogeneity check, {bad} failures", c.elapsed)
