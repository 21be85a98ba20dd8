from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hoconvex.diffcore import (
    GridFunction,
    difference_stencil,
    divided_difference,
    divided_difference_direct,
    divided_difference_recursive,
    forward_difference,
    identity_check,
    iterated_difference,
    mixed_difference,
)
from hoconvex.errors import DomainError, UsageError
from hoconvex.scalar import SQRT2, QuadElem

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
positive_steps = st.fractions(min_value=Fraction(1, 12), max_value=3, max_denominator=12)


def _mixed_oracle(f, steps, x):
    # nested forward differences, the definition
    if not steps:
        return f(x)
    h, rest = steps[0], steps[1:]
    return _mixed_oracle(f, rest, x + h) - _mixed_oracle(f, rest, x)


def test_unit_grid_third_divided_difference_of_cube():
    pts = [0, 1, 2, 3]
    vals = [Fraction(x) ** 3 for x in pts]
    assert divided_difference_direct(pts, vals) == 1
    assert divided_difference_recursive(pts, vals) == 1


def test_iterated_difference_of_quartic():
    assert iterated_difference(lambda x: Fraction(x) ** 4, 1, 4, 0) == 24


def test_mixed_difference_of_cube():
    steps = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 4))
    # Delta_{h1} Delta_{h2} Delta_{h3} x^3 = 6 h1 h2 h3
    assert mixed_difference(lambda x: x**3, steps, Fraction(7, 5)) == Fraction(1, 4)


@given(st.lists(positive_steps, min_size=1, max_size=5), rationals)
def test_mixed_matches_nested_definition(steps, x):
    f = lambda t: t**4 - 3 * t**2 + t  # noqa: E731
    assert mixed_difference(f, steps, x) == _mixed_oracle(f, steps, x)


@given(st.lists(positive_steps, min_size=1, max_size=4), rationals)
def test_mixed_difference_is_symmetric(steps, x):
    f = lambda t: t**5  # noqa: E731
    ref = mixed_difference(f, steps, x)
    for perm in itertools.permutations(steps):
        assert mixed_difference(f, perm, x) == ref


@given(positive_steps, st.integers(0, 6), rationals)
def test_iterated_equals_repeated_mixed(h, k, x):
    f = lambda t: t**3 + t  # noqa: E731
    assert iterated_difference(f, h, k, x) == mixed_difference(f, [h] * k, x)


def test_stencil_merges_offsets():
    stencil = dict(difference_stencil([1, 1]))
    assert stencil == {0: 1, 1: -2, 2: 1}
    assert sum(c for _, c in difference_stencil([1, 2, 3])) == 0


@settings(max_examples=60)
@given(st.lists(rationals, min_size=1, max_size=7, unique=True), st.data())
def test_direct_equals_recursive(points, data):
    values = data.draw(st.lists(rationals, min_size=len(points), max_size=len(points)))
    assert divided_difference_direct(points, values) == divided_difference_recursive(points, values)


def test_divided_difference_of_polynomial_leading_coefficient():
    # [x0..xk; p] is the leading coefficient when deg p = k
    pts = [Fraction(-1), Fraction(1, 3), Fraction(2), Fraction(5, 2)]
    vals = [7 * x**3 - x + 1 for x in pts]
    assert divided_difference(pts, vals) == 7


def test_divided_difference_errors():
    with pytest.raises(DomainError):
        divided_difference([0, 1, 1], [0, 1, 2])
    with pytest.raises(UsageError):
        divided_difference([0, 1], [0])


def test_quad_nodes_divided_difference():
    pts = [QuadElem(0), SQRT2, QuadElem(2), 1 + SQRT2]
    vals = [x**3 for x in pts]
    assert divided_difference(pts, vals) == 1


@given(st.integers(1, 5), st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(2, 3)]), rationals)
def test_identity_exact(n, h, x):
    check = identity_check(lambda t: t ** (n + 2) - t, x, h, n)
    assert check.equal and check.margin == 0


def test_identity_float():
    check = identity_check(math.exp, 0.3, 0.5, 3)
    assert check.equal
    assert abs(check.lhs - math.exp(0.3) * (math.exp(0.5) - 1) ** 4 / (24 * 0.5**4)) < 1e-9


def test_forward_difference_rejects_nonpositive_step():
    with pytest.raises(UsageError):
        forward_difference(lambda t: t, 0, 1)
    with pytest.raises(UsageError):
        mixed_difference(lambda t: t, [1] * 17, 0)


class TestGridFunction:
    def test_lookup_and_mesh(self):
        g = GridFunction.from_function(lambda x: x * x, [Fraction(i, 4) for i in range(5)])
        assert g(Fraction(1, 2)) == Fraction(1, 4)
        assert g.mesh == Fraction(1, 4)
        with pytest.raises(DomainError):
            g(Fraction(1, 3))

    def test_float_snapping(self):
        pts = [i / 10 for i in range(11)]
        g = GridFunction.from_function(math.exp, pts)
        assert g(0.1 + 0.2) == g.values[3]
        assert g.mesh == pytest.approx(0.1)

    def test_validation(self):
        with pytest.raises(UsageError):
            GridFunction((0, 0), (1, 2))
        with pytest.raises(UsageError):
            GridFunction((0,), (1,))
        with pytest.raises(UsageError):
            GridFunction((0, 1), (1, 2), interval=(0, 2))

    def test_non_uniform_has_no_mesh(self):
        g = GridFunction((0, 1, 3), (0, 1, 9))
        assert g.mesh is None and not g.is_uniform

    def test_restrict(self):
        g = GridFunction.from_function(lambda x: x, range(10))
        assert g.restrict(2, 5).points == (2, 3, 4, 5)
