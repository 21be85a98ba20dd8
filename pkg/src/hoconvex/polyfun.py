"""Generalized polynomial functions on the module Q + Q*sqrt(2).

A symmetric k-additive map restricted to ``{p + q sqrt 2 : p, q rational}``
is Q-multilinear, so it is fixed by its values on the basis ``{1, sqrt 2}``.
By symmetry only the number ``j`` of slots fed ``sqrt 2`` matters, which
leaves ``k + 1`` coefficients ``c_0, ..., c_k``::

    A_k(x_1, ..., x_k) = sum over subsets S of the slots of
                         c_|S| * prod_{i not in S} p_i * prod_{i in S} q_i
    a_k(p + q sqrt 2)  = sum_j c_j * C(k, j) * p^(k-j) * q^j

Such a map is continuous (a standard monomial ``alpha x^k``) exactly when
``c_j = alpha * sqrt(2)^j`` for every ``j``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .diffcore import iterated_difference
from .errors import UsageError
from .scalar import SQRT2, QuadElem, parse_rational

MAX_DEGREE = 6


def _quad(x) -> QuadElem:
    return x if isinstance(x, QuadElem) else QuadElem(x)


@dataclass(frozen=True)
class SymTensor:
    """Symmetric k-additive map stored by its ``k + 1`` multiset coefficients."""

    k: int
    coeffs: tuple

    def __post_init__(self):
        if self.k < 1:
            raise UsageError("tensor arity must be at least 1")
        coeffs = tuple(_quad(c) for c in self.coeffs)
        if len(coeffs) != self.k + 1:
            raise UsageError(f"arity {self.k} needs {self.k + 1} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    def diagonal(self, x) -> QuadElem:
        """``a_k(x) = A_k(x, ..., x)``."""
        x = _quad(x)
        p, q = x.p, x.q
        k = self.k
        total = QuadElem(0)
        for j, c in enumerate(self.coeffs):
            if c:
                total = total + c * (math.comb(k, j) * p ** (k - j) * q**j)
        return total

    def multilinear(self, xs: Sequence) -> QuadElem:
        """``A_k(x_1, ..., x_k)``, via the elementary symmetric sums of the slots."""
        if len(xs) != self.k:
            raise UsageError(f"expected {self.k} arguments, got {len(xs)}")
        # e[j] = sum over j-subsets S of prod_{S} q_i * prod_{not S} p_i
        e = [Fraction(1)]
        for x in xs:
            x = _quad(x)
            nxt = [Fraction(0)] * (len(e) + 1)
            for j, v in enumerate(e):
                nxt[j] += v * x.p
                nxt[j + 1] += v * x.q
            e = nxt
        total = QuadElem(0)
        for c, v in zip(self.coeffs, e):
            total = total + c * v
        return total


@dataclass(frozen=True)
class PolyFunction:
    """``a_0 + a_1(x) + ... + a_n(x)`` with ``a_k`` the diagonal of a SymTensor."""

    degree: int
    a0: QuadElem
    tensors: tuple

    def __post_init__(self):
        object.__setattr__(self, "a0", _quad(self.a0))
        tensors = tuple(self.tensors)
        if self.degree < 0:
            raise UsageError("degree must be nonnegative")
        if [t.k for t in tensors] != list(range(1, self.degree + 1)):
            raise UsageError("need exactly one tensor for each arity 1..degree")
        object.__setattr__(self, "tensors", tensors)

    def __call__(self, x) -> QuadElem:
        return evaluate_polyfun(self, x)

    @classmethod
    def from_standard(cls, coefficients: Sequence) -> PolyFunction:
        """The standard polynomial ``sum alpha_k x^k`` as a polynomial function."""
        coefficients = [_quad(c) for c in coefficients]
        if not coefficients:
            coefficients = [QuadElem(0)]
        tensors = []
        for k, alpha in enumerate(coefficients[1:], start=1):
            tensors.append(SymTensor(k, tuple(alpha * SQRT2**j for j in range(k + 1))))
        return cls(len(coefficients) - 1, coefficients[0], tuple(tensors))

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "a0": [str(self.a0.p), str(self.a0.q)],
            "tensors": [
                {"k": t.k, "coeffs": [[str(c.p), str(c.q)] for c in t.coeffs]}
                for t in self.tensors
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> PolyFunction:
        def quad(pair):
            return QuadElem(parse_rational(pair[0]), parse_rational(pair[1]))

        tensors = tuple(
            SymTensor(int(t["k"]), tuple(quad(c) for c in t["coeffs"])) for t in data["tensors"]
        )
        return cls(int(data["degree"]), quad(data["a0"]), tensors)


def rational_part_projector() -> PolyFunction:
    """``p + q sqrt 2 -> p``: additive, degree 1, and not continuous."""
    return PolyFunction(1, QuadElem(0), (SymTensor(1, (QuadElem(1), QuadElem(0))),))


def evaluate_polyfun(P: PolyFunction, x) -> QuadElem:
    x = _quad(x)
    total = P.a0
    for t in P.tensors:
        total = total + t.diagonal(x)
    return total


def frechet_exact(P: PolyFunction, x, h, n: int) -> QuadElem:
    """``Delta_h^{n+1} P(x)`` for a positive rational step ``h``."""
    h = Fraction(h)
    if h <= 0:
        raise UsageError("step must be a positive rational")
    return iterated_difference(lambda t: evaluate_polyfun(P, t), h, n + 1, _quad(x))


def is_standard(P: PolyFunction):
    """``(True, (alpha_0, ..., alpha_n))`` if P is a standard polynomial, else ``(False, None)``."""
    alphas = [P.a0]
    for t in P.tensors:
        alpha = t.coeffs[0]
        for j, c in enumerate(t.coeffs):
            if c != alpha * SQRT2**j:
                return False, None
        alphas.append(alpha)
    return True, tuple(alphas)


def _small_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-6, 6), rng.randint(1, 4))


def _small_quad(rng: random.Random, irrational: bool = True) -> QuadElem:
    q = _small_rational(rng) if irrational and rng.random() < 0.5 else 0
    return QuadElem(_small_rational(rng), q)


def random_polyfun(n: int, seed=None, standard_fraction: float = 0.5) -> PolyFunction:
    """Deterministic random polynomial function of degree at most ``n``.

    With probability ``standard_fraction`` the result is a standard
    polynomial; otherwise every tensor gets independent coefficients and the
    result is guaranteed not to be standard (for ``n >= 1``).
    """
    if n < 0:
        raise UsageError("degree must be nonnegative")
    if n > MAX_DEGREE:
        raise UsageError(f"degree capped at {MAX_DEGREE}")
    rng = random.Random(seed)
    a0 = _small_quad(rng)
    if rng.random() < standard_fraction:
        return PolyFunction.from_standard([a0] + [_small_quad(rng) for _ in range(n)])
    tensors = [SymTensor(k, tuple(_small_quad(rng) for _ in range(k + 1))) for k in range(1, n + 1)]
    P = PolyFunction(n, a0, tuple(tensors))
    if n >= 1 and is_standard(P)[0]:
        t = tensors[0]
        tensors[0] = SymTensor(1, (t.coeffs[0], t.coeffs[1] + 1))
        P = PolyFunction(n, a0, tuple(tensors))
    return P


def rational_restriction(P: PolyFunction) -> tuple:
    """Coefficients of the standard polynomial that agrees with P on Q."""
    return (P.a0,) + tuple(t.coeffs[0] for t in P.tensors)


def eval_standard(coefficients: Sequence, x):
    total = 0
    for c in reversed(coefficients):
        total = total * x + c
    return total


__all__ = [
    "MAX_DEGREE",
    "PolyFunction",
    "SymTensor",
    "eval_standard",
    "evaluate_polyfun",
    "frechet_exact",
    "is_standard",
    "random_polyfun",
    "rational_part_projector",
    "rational_restriction",
]
