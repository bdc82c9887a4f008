import json
import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from twwlab.core import TwwError
from twwlab.minors import (
    TypeMatrix,
    bad_columns,
    find_grid_minor,
    find_mixed_minor,
    minimal_bad_intervals,
    mt_threshold,
    search_grid_minor,
    search_mixed_minor,
    validate_grid_witness,
    validate_mixed_witness,
    witness_from_json,
)

from conftest import random_matrix


def zones_of(rc, cc, m, n):
    rb = [0, *rc, m]
    cb = [0, *cc, n]
    return [(range(rb[i], rb[i + 1]), range(cb[j], cb[j + 1]))
            for i in range(len(rb) - 1) for j in range(len(cb) - 1)]


def brute_grid(M, t):
    m, n = len(M), len(M[0])
    for rc in combinations(range(1, m), t - 1):
        for cc in combinations(range(1, n), t - 1):
            if all(any(M[r][c] for r in R for c in C) for R, C in zones_of(rc, cc, m, n)):
                return rc, cc
    return None


def brute_mixed(M, k, t):
    m, n = len(M), len(M[0])
    for rc in combinations(range(1, m), t - 1):
        for cc in combinations(range(1, n), t - 1):
            if all(len({tuple(M[r][c] for c in C) for r in R}) >= k
                   or len({tuple(M[r][c] for r in R) for c in C}) >= k
                   for R, C in zones_of(rc, cc, m, n)):
                return rc, cc
    return None


def brute_bad(M, rows, k):
    n = len(M[0])

    def bad(a, b):
        return len({tuple(M[r][a:b]) for r in rows}) >= k

    return sorted((a, b) for a in range(n) for b in range(a + 1, n + 1)
                  if bad(a, b) and not any(bad(x, y) for x in range(a, b) for y in range(x + 1, b + 1)
                                           if (x, y) != (a, b)))


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def test_grid_examples():
    w = find_grid_minor([[1] * 4] * 4, 2)
    assert (w.row_cuts, w.col_cuts) == ((1,), (1,))
    assert find_grid_minor(identity(4), 2) is None
    X = [[int(i == j or i + j == 3) for j in range(4)] for i in range(4)]
    assert validate_grid_witness(X, find_grid_minor(X, 2))
    with pytest.raises(TwwError):
        find_grid_minor(identity(3), 4)
    with pytest.raises(TwwError):
        find_grid_minor(identity(3), 0)


def test_mixed_examples():
    assert find_mixed_minor([[3] * 5] * 5, 2, 3) is None
    w = find_mixed_minor([[0]], 1, 1)
    assert w is not None and w.zones[0].kind == "rows"
    with pytest.raises(TwwError):
        find_mixed_minor(identity(2), 1, 3)


def test_mt_threshold():
    assert mt_threshold(2, "exp8") == 32
    assert mt_threshold(1, "exp8") == 16
    assert mt_threshold(3, "exp1") == 8
    assert mt_threshold(4, "lin2") == 8
    assert [mt_threshold(t, "root1") for t in (1, 4, 5, 9, 10)] == [1, 2, 3, 3, 4]
    with pytest.raises(TwwError):
        mt_threshold(0)
    with pytest.raises(TwwError):
        mt_threshold(2, "lin0")


def test_bad_interval_examples():
    assert minimal_bad_intervals([[1] * 4] * 3, range(3), 2) == []
    I3 = identity(3)
    got = minimal_bad_intervals(I3, range(3), 2)
    assert [iv.cols for iv in got] == [(0, 1), (1, 2), (2, 3)]
    assert bad_columns(I3, range(3), 2) == {0, 1, 2}
    assert [iv.cols for iv in minimal_bad_intervals(I3, (0, 2), 1)] == [(0, 1), (1, 2), (2, 3)]


def test_grid_and_mixed_agree_with_brute_force():
    rng = random.Random(11)
    for _ in range(150):
        m, n = rng.randint(1, 7), rng.randint(1, 7)
        M = random_matrix(rng, m, n)
        for t in range(1, min(m, n, 4) + 1):
            w = find_grid_minor(M, t)
            b = brute_grid(M, t)
            assert (w is None) == (b is None)
            if w:
                assert (w.row_cuts, w.col_cuts) == b  # lexicographically least
                assert validate_grid_witness(M, w)
        A = random_matrix(rng, m, n, 3)
        for k in (1, 2, 3):
            for t in range(1, min(m, n, 3) + 1):
                w = find_mixed_minor(A, k, t)
                b = brute_mixed(A, k, t)
                assert (w is None) == (b is None)
                if w:
                    assert (w.row_cuts, w.col_cuts) == b
                    assert validate_mixed_witness(A, w)


def test_mixed_minor_monotonicity_on_8x8():
    rng = random.Random(3)
    for _ in range(40):
        M = random_matrix(rng, 8, 8, rng.choice([2, 3]))
        for k in (2, 3):
            for t in (2, 3):
                if find_mixed_minor(M, k, t):
                    assert find_mixed_minor(M, k - 1, t)
                    assert find_mixed_minor(M, k, t - 1)


def test_validators_reject_tampering():
    M = [[1, 0, 1], [0, 1, 0], [1, 1, 0]]
    w = find_grid_minor(M, 2)
    bad = type(w)(w.t, w.row_cuts, w.col_cuts, ((9, 9),) + w.cells[1:])
    assert not validate_grid_witness(M, bad)
    bad = type(w)(w.t, (0,), w.col_cuts, w.cells)
    assert not validate_grid_witness(M, bad)
    A = [[(i + 2 * j) % 3 for j in range(6)] for i in range(6)]
    mw = find_mixed_minor(A, 2, 2)
    z = mw.zones[0]
    assert not validate_mixed_witness(A, type(mw)(2, 2, mw.row_cuts, mw.col_cuts,
                                                            (type(z)(z.kind, z.evidence[:1]),) + mw.zones[1:]))


def test_witness_json_round_trip():
    M = [[(i + 2 * j) % 3 for j in range(6)] for i in range(6)]
    for w in (find_grid_minor([[1] * 5] * 5, 3), find_mixed_minor(M, 2, 2)):
        doc = json.loads(json.dumps(w.to_json()))
        assert doc["version"] == 1
        assert witness_from_json(doc) == w


def test_regime_flag():
    assert search_grid_minor(identity(4), 2).exhaustive
    assert not search_grid_minor(identity(17), 2).exhaustive
    assert not search_mixed_minor(identity(15), 2, 2).exhaustive
    big = [[1] * 20] * 20
    res = search_grid_minor(big, 5)
    assert res.witness is not None and validate_grid_witness(big, res.witness)


def test_transpose_of_mixed_witness_is_valid():
    rng = random.Random(5)
    for _ in range(30):
        M = random_matrix(rng, 6, 5, 3)
        w = find_mixed_minor(M, 2, 2)
        if w:
            assert validate_mixed_witness(TypeMatrix.of(M).transpose(), w.transpose())


@settings(max_examples=80)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 4), st.data())
def test_bad_intervals_match_brute_force(m, n, k, data):
    M = [[data.draw(st.integers(0, 2)) for _ in range(n)] for _ in range(m)]
    r0 = data.draw(st.integers(0, m - 1))
    r1 = data.draw(st.integers(r0 + 1, m))
    got = [iv.cols for iv in minimal_bad_intervals(M, range(r0, r1), k)]
    assert got == brute_bad(M, range(r0, r1), k)
    for iv in minimal_bad_intervals(M, range(r0, r1), k):
        assert iv.distinct >= k


def test_marcus_tardos_statistics():
    rng = random.Random(2024)
    ones = min(mt_threshold(2) * 12, 144)
    misses = 0
    for _ in range(200):
        cells = rng.sample(range(144), ones)
        M = [[0] * 12 for _ in range(12)]
        for c in cells:
            M[c // 12][c % 12] = 1
        if find_grid_minor(M, 2) is None:
            misses += 1
    print(f"dense matrices without a 2-grid minor: {misses}/200")
    assert misses == 0
