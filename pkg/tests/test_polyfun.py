from __future__ import annotations

import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from hoconvex.errors import UsageError
from hoconvex.polyfun import (
    PolyFunction,
    SymTensor,
    evaluate_polyfun,
    frechet_exact,
    is_standard,
    random_polyfun,
    rational_part_projector,
    rational_restriction,
)
from hoconvex.scalar import SQRT2, QuadElem

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
quads = st.builds(QuadElem, rationals, rationals)
steps = st.fractions(min_value=Fraction(1, 6), max_value=3, max_denominator=6)


def _sym(x: QuadElem):
    return sympy.Rational(x.p.numerator, x.p.denominator) + sympy.Rational(x.q.numerator, x.q.denominator) * sympy.sqrt(2)


def _standard_by_linsolve(P: PolyFunction) -> bool:
    """P is standard iff some real alphas fit P(x) = sum alpha_k x^k on module points."""
    alphas = sympy.symbols(f"a0:{P.degree + 1}")
    pts = [QuadElem(Fraction(i, 3), Fraction(j, 2)) for i in range(-2, 3) for j in range(-1, 2)]
    eqs = [sum(a * _sym(x) ** k for k, a in enumerate(alphas)) - _sym(P(x)) for x in pts]
    return sympy.linsolve([sympy.expand(e) for e in eqs], alphas) != sympy.S.EmptySet


def test_tensor_diagonal_matches_multilinear():
    t = SymTensor(3, (1, Fraction(1, 2), -2, 3))
    x = QuadElem(Fraction(2, 3), Fraction(-1, 4))
    assert t.diagonal(x) == t.multilinear([x, x, x])


@given(st.lists(quads, min_size=3, max_size=3), quads)
def test_multilinear_is_additive_in_each_slot(xs, y):
    t = SymTensor(3, (2, -1, Fraction(1, 3), 5))
    left = t.multilinear([xs[0] + y, xs[1], xs[2]])
    assert left == t.multilinear(xs) + t.multilinear([y, xs[1], xs[2]])
    assert t.multilinear(xs) == t.multilinear([xs[2], xs[0], xs[1]])


def test_standard_polynomial_evaluates_like_horner():
    P = PolyFunction.from_standard([1, -2, Fraction(1, 2)])
    x = 1 + SQRT2
    assert P(x) == 1 - 2 * x + x * x / 2
    ok, alphas = is_standard(P)
    assert ok and alphas == (1, -2, Fraction(1, 2))


def test_rational_part_projector():
    A = rational_part_projector()
    assert A(QuadElem(Fraction(3, 4), 7)) == Fraction(3, 4)
    assert A(QuadElem(1) + SQRT2) == A(QuadElem(1)) + A(SQRT2)
    assert not is_standard(A)[0]
    assert not _standard_by_linsolve(A)


@pytest.mark.parametrize("seed", range(12))
def test_is_standard_agrees_with_linsolve_oracle(seed):
    P = random_polyfun(2, seed)
    assert is_standard(P)[0] == _standard_by_linsolve(P)


def test_nonstandard_generation_is_guaranteed():
    for seed in range(30):
        assert not is_standard(random_polyfun(3, seed, standard_fraction=0.0))[0]
        assert is_standard(random_polyfun(3, seed, standard_fraction=1.0))[0]


def test_random_polyfun_is_deterministic():
    assert random_polyfun(3, 11) == random_polyfun(3, 11)
    assert random_polyfun(3, 11).to_json() == random_polyfun(3, 11).to_json()


@settings(max_examples=40)
@given(st.integers(0, 4), st.integers(0, 10**6), quads, steps)
def test_frechet_annihilates(n, seed, x, h):
    P = random_polyfun(n, seed)
    assert frechet_exact(P, x, h, n) == 0


def test_frechet_of_degree_exceeding_order():
    P = PolyFunction.from_standard([0, 0, 0, 1])
    # Delta_h^3 x^3 = 6 h^3
    assert frechet_exact(P, SQRT2, Fraction(1, 2), 2) == Fraction(6, 8)


@given(rationals, st.integers(0, 10**6))
def test_rational_restriction(x, seed):
    P = random_polyfun(3, seed)
    coeffs = rational_restriction(P)
    assert P(x) == sum(c * x**k for k, c in enumerate(coeffs))


def test_json_roundtrip():
    P = random_polyfun(4, 3, standard_fraction=0.0)
    assert PolyFunction.from_json(P.to_json()) == P


def test_validation():
    with pytest.raises(UsageError):
        SymTensor(2, (1, 2))
    with pytest.raises(UsageError):
        PolyFunction(2, 0, (SymTensor(1, (1, 0)),))
    with pytest.raises(UsageError):
        frechet_exact(random_polyfun(1, 0), 0, 0, 1)
    with pytest.raises(UsageError):
        random_polyfun(7, 0)


def test_evaluate_on_ints():
    P = PolyFunction.from_standard([0, 0, 1])
    assert evaluate_polyfun(P, 3) == 9
    assert math.isclose(float(P(SQRT2)), 2.0)
