from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urnlab.exact import (
    RatMatrix,
    RatPoly,
    SingularMatrix,
    as_rational,
    char_poly,
    det,
    ldl_psd,
    nullspace,
    rank,
    rat_from_json,
    rat_solve,
    rat_to_json,
)

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def square(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    return RatMatrix([[draw(small) for _ in range(n)] for _ in range(n)])


def test_as_rational_accepts_strings_and_rejects_floats():
    assert as_rational("3/4") == Fraction(3, 4)
    assert as_rational(2) == 2
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_matrix_algebra():
    a = RatMatrix([[1, 2], [3, 4]])
    assert (a @ RatMatrix.identity(2)) == a
    assert a.T.tolist() == [[1, 3], [2, 4]]
    assert a.trace() == 5
    assert det(a) == -2
    assert rank(RatMatrix([[1, 2], [2, 4]])) == 1


def test_solve_and_singular():
    a = RatMatrix([[2, 1], [1, 3]])
    x = rat_solve(a, RatMatrix.column([1, 2]))
    assert a @ x == RatMatrix.column([1, 2])
    with pytest.raises(SingularMatrix):
        rat_solve(RatMatrix([[1, 2], [2, 4]]), RatMatrix.column([1, 0]))


def test_nullspace_vectors_are_annihilated():
    a = RatMatrix([[1, 2, 3], [2, 4, 6]])
    ns = nullspace(a)
    assert len(ns) == 2
    for v in ns:
        assert all(x == 0 for x in a.apply(v))


def test_char_poly_small():
    a = RatMatrix([[0, 1], [-2, -3]])
    assert char_poly(a) == RatPoly([2, 3, 1])
    assert char_poly(a, "faddeev") == RatPoly([2, 3, 1])


@settings(max_examples=60, deadline=None)
@given(square(), small)
def test_char_poly_matches_determinant(a, r):
    p = char_poly(a)
    shifted = RatMatrix(
        [[(r if i == j else 0) - a[i, j] for j in range(a.ncols)] for i in range(a.nrows)]
    )
    assert p(r) == det(shifted)


@settings(max_examples=60, deadline=None)
@given(square(6))
def test_char_poly_methods_agree(a):
    assert char_poly(a, "hessenberg") == char_poly(a, "faddeev")


def test_poly_arithmetic_and_roots():
    p = RatPoly.from_roots([Fraction(1, 2), -3, -3])
    assert p.degree == 3
    assert sorted(p.rational_roots()) == [(Fraction(-3), 2), (Fraction(1, 2), 1)]
    q, r = divmod(p, RatPoly([3, 1]))
    assert r == RatPoly() and q(-3) == 0
    assert p.squarefree() == RatPoly.from_roots([Fraction(1, 2), -3])


def test_ldl_psd():
    assert ldl_psd(RatMatrix([[2, 1], [1, 2]]))[0]
    assert ldl_psd(RatMatrix([[1, 1], [1, 1]]))[0]
    assert not ldl_psd(RatMatrix([[1, 2], [2, 1]]))[0]


@given(small)
def test_json_round_trip(x):
    obj = rat_to_json(x)
    assert rat_from_json(obj) == x
    assert obj["float"] == pytest.approx(float(x))
