import itertools

import pytest
from hypothesis import given, settings, strategies as st

from banditlb._validation import Params, UsageError, is_prime
from banditlb.gfp import (
    FieldMatrix,
    dot_mod,
    inv_mod,
    is_multiple_pair,
    matrix_rank,
    rref_mod,
    solution_count,
)


def brute_count(rows, rhs, p, n):
    return sum(
        all(sum(a * b for a, b in zip(r, u)) % p == z for r, z in zip(rows, rhs))
        for u in itertools.product(range(p), repeat=n)
    )


def test_params_validation():
    assert Params(5, 2).p == 5
    for p, n in [(4, 2), (1, 2), (0, 1), (5, 0)]:
        with pytest.raises(UsageError):
            Params(p, n)


def test_is_prime_matches_sympy():
    sympy = pytest.importorskip("sympy")
    assert [q for q in range(200) if is_prime(q)] == list(sympy.primerange(0, 200))


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 101])
def test_inverse(p):
    for a in range(1, p):
        assert a * inv_mod(a, p) % p == 1
    with pytest.raises(ZeroDivisionError):
        inv_mod(0, p)


@pytest.mark.parametrize(
    "x, u, p, expected",
    [((1, 2, 3), (3, 2, 1), 5, 0), ((1, 1), (2, 3), 5, 0), ((0, 0, 0), (4, 1, 2), 5, 0)],
)
def test_dot_mod(x, u, p, expected):
    assert dot_mod(x, u, Params(p, len(x))) == expected


def test_dot_mod_length_mismatch():
    with pytest.raises(UsageError):
        dot_mod((1, 2), (1, 2, 3), Params(5, 2))


def test_rref_examples():
    prm = Params(5, 2)
    assert rref_mod(FieldMatrix(((1, 1), (1, 2))), prm).rank == 2
    assert rref_mod(FieldMatrix(((1, 1), (2, 2))), prm).rank == 1
    res = rref_mod(FieldMatrix(((1, 1), (2, 2)), (1, 1)), prm)
    assert res.rank == 1 and not res.consistent
    assert brute_count([(1, 1), (2, 2)], [1, 1], 5, 2) == 0


def test_field_matrix_shape_errors():
    with pytest.raises(UsageError):
        FieldMatrix(((1, 2), (1,)))
    with pytest.raises(UsageError):
        FieldMatrix(((1, 2),), (1, 2))


def test_solution_count_examples():
    prm = Params(5, 2)
    assert solution_count(FieldMatrix(((1, 1), (1, 2)), (0, 0)), prm) == 1
    assert solution_count(FieldMatrix(((1, 1),), (3,)), prm) == 5
    assert brute_count([(1, 1)], [3], 5, 2) == 5
    assert solution_count(FieldMatrix(((1, 1), (2, 2)), (1, 1)), prm) == 0


def test_solution_count_big_integers():
    prm = Params(101, 50)
    m = FieldMatrix(((1,) * 50,), (7,))
    assert solution_count(m, prm) == 101**49


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2), (3, 3), (5, 2), (7, 2)])
def test_solution_count_matches_enumeration(p, n):
    prm = Params(p, n)
    vecs = list(itertools.product(range(p), repeat=n))
    # every single equation and a sample of two-equation systems
    for r in vecs:
        for z in range(p):
            assert solution_count(FieldMatrix((r,), (z,)), prm) == brute_count([r], [z], p, n)
    for r1, r2 in itertools.islice(itertools.product(vecs, repeat=2), 0, None, 7):
        for z1, z2 in [(0, 0), (1, 0), (p - 1, 1 % p)]:
            got = solution_count(FieldMatrix((r1, r2), (z1, z2)), prm)
            assert got == brute_count([r1, r2], [z1, z2], p, n)


def test_solution_count_three_dims_three_rows():
    p, n = 3, 3
    prm = Params(p, n)
    vecs = list(itertools.product(range(p), repeat=n))
    for rows in itertools.islice(itertools.combinations(vecs, 3), 0, None, 11):
        rhs = (1, 0, 2)
        assert solution_count(FieldMatrix(rows, rhs), prm) == brute_count(rows, rhs, p, n)


matrices = st.integers(min_value=0, max_value=3).flatmap(
    lambda pi: st.tuples(
        st.just([2, 3, 5, 7][pi]),
        st.lists(
            st.lists(st.integers(0, [2, 3, 5, 7][pi] - 1), min_size=3, max_size=3),
            min_size=1,
            max_size=4,
        ),
        st.lists(st.integers(0, [2, 3, 5, 7][pi] - 1), min_size=4, max_size=4),
    )
)


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_rref_idempotent(data):
    p, rows, rhs = data
    prm = Params(p, 3)
    m = FieldMatrix(tuple(map(tuple, rows)), tuple(rhs[: len(rows)]))
    once = rref_mod(m, prm)
    twice = rref_mod(once.matrix, prm)
    assert twice == once


def test_multiple_pair_examples():
    prm = Params(5, 2)
    assert is_multiple_pair((1, 2), (2, 4), prm)
    assert not is_multiple_pair((1, 1), (1, 2), prm)
    for p in (5, 7, 11):
        assert is_multiple_pair((1, 1), (2, 2), Params(p, 2))
    with pytest.raises(UsageError):
        is_multiple_pair((0, 0), (1, 1), prm)


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (3, 3)])
def test_multiple_pair_properties(p, n):
    prm = Params(p, n)
    nonzero = [v for v in itertools.product(range(p), repeat=n) if any(v)]
    for s in nonzero:
        assert is_multiple_pair(s, s, prm)
        for t in nonzero:
            m = is_multiple_pair(s, t, prm)
            assert m == is_multiple_pair(t, s, prm)
            assert m == any(tuple(lam * a % p for a in s) == t for lam in range(1, p))
            assert m == (matrix_rank([s, t], prm) == 1)
