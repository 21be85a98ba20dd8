"""Scalar substrate: exact rationals, the field Q(sqrt 2), and binary64.

A scalar lives in one of three modes:

* ``"exact"`` -- :class:`fractions.Fraction` (``int`` is accepted and
  treated as an exact rational),
* ``"quad"`` -- :class:`QuadElem`, an exact element ``p + q*sqrt(2)``,
* ``"float"`` -- a Python ``float``.

Rationals embed into ``Q(sqrt 2)``, so exact and quad scalars combine
freely.  Mixing either exact mode with floats raises :class:`ModeError`;
converting is always an explicit call (:func:`to_mode`, ``float(x)``).
"""

from __future__ import annotations

import math
import numbers
import re
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Union

from .errors import ModeError

EXACT = "exact"
QUAD = "quad"
FLOAT = "float"
MODES = (EXACT, QUAD, FLOAT)

Rational = Fraction


def parse_rational(text: str) -> Fraction:
    """Parse ``"-3/7"``, ``"2"``, ``"0.25"`` or ``"1e-3"`` exactly."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    cleaned = str(text).strip().replace("−", "-")
    try:
        return Fraction(cleaned)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"invalid rational literal {text!r}") from None


def format_rational(x) -> str:
    return str(Fraction(x))


def _coerce_parts(other):
    """Return ``(a, b, d)`` for an exact operand, ``None`` if unsupported."""
    if isinstance(other, QuadElem):
        return other._a, other._b, other._d
    if isinstance(other, int) and not isinstance(other, bool):
        return other, 0, 1
    if isinstance(other, Fraction):
        return other.numerator, 0, other.denominator
    if isinstance(other, float):
        raise ModeError("cannot mix a float with an exact Q(sqrt 2) element")
    return None


def _sign_of(a: int, b: int) -> int:
    """Exact sign of ``a + b*sqrt(2)`` for integers ``a``, ``b``."""
    if a >= 0 and b >= 0:
        return 1 if (a or b) else 0
    if a <= 0 and b <= 0:
        return -1
    # opposite signs: compare a^2 with 2 b^2 (never equal unless both zero)
    if a > 0:
        return 1 if a * a > 2 * b * b else -1
    return -1 if a * a > 2 * b * b else 1


@total_ordering
class QuadElem:
    """Exact element ``p + q*sqrt(2)`` of the field Q(sqrt 2).

    Stored internally as integers ``(a, b, d)`` meaning ``(a + b*sqrt 2)/d``
    with ``d > 0`` and ``gcd(a, b, d) = 1``, which makes the representation
    canonical.  ``p`` and ``q`` are exposed as :class:`Fraction` properties.
    """

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, p=0, q=0):
        p = parse_rational(p) if isinstance(p, str) else Fraction(p)
        q = parse_rational(q) if isinstance(q, str) else Fraction(q)
        d = p.denominator * q.denominator // math.gcd(p.denominator, q.denominator)
        self._set(p.numerator * (d // p.denominator), q.numerator * (d // q.denominator), d)

    def _set(self, a: int, b: int, d: int) -> None:
        if d < 0:
            a, b, d = -a, -b, -d
        g = math.gcd(math.gcd(a, b), d)
        if g > 1:
            a, b, d = a // g, b // g, d // g
        self._a, self._b, self._d = a, b, d

    @classmethod
    def _raw(cls, a: int, b: int, d: int) -> QuadElem:
        obj = cls.__new__(cls)
        obj._set(a, b, d)
        return obj

    @property
    def p(self) -> Fraction:
        return Fraction(self._a, self._d)

    @property
    def q(self) -> Fraction:
        return Fraction(self._b, self._d)

    @property
    def is_rational(self) -> bool:
        return self._b == 0

    def conjugate(self) -> QuadElem:
        return QuadElem._raw(self._a, -self._b, self._d)

    def norm(self) -> Fraction:
        """Field norm ``p^2 - 2 q^2``."""
        return Fraction(self._a * self._a - 2 * self._b * self._b, self._d * self._d)

    def sign(self) -> int:
        return _sign_of(self._a, self._b)

    # arithmetic -------------------------------------------------------

    def __add__(self, other):
        o = _coerce_parts(other)
        if o is None:
            return NotImplemented
        a, b, d = o
        return QuadElem._raw(self._a * d + a * self._d, self._b * d + b * self._d, self._d * d)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem._raw(-self._a, -self._b, self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = _coerce_parts(other)
        if o is None:
            return NotImplemented
        a, b, d = o
        return QuadElem._raw(self._a * d - a * self._d, self._b * d - b * self._d, self._d * d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = _coerce_parts(other)
        if o is None:
            return NotImplemented
        a, b, d = o
        return QuadElem._raw(
            self._a * a + 2 * self._b * b, self._a * b + self._b * a, self._d * d
        )

    __rmul__ = __mul__

    def inverse(self) -> QuadElem:
        """Multiplicative inverse ``(p - q sqrt 2)/(p^2 - 2 q^2)``."""
        n = self._a * self._a - 2 * self._b * self._b
        if n == 0:
            raise ZeroDivisionError("QuadElem division by zero")
        return QuadElem._raw(self._d * self._a, -self._d * self._b, n)

    def __truediv__(self, other):
        o = _coerce_parts(other)
        if o is None:
            return NotImplemented
        a, b, d = o
        if b == 0:
            if a == 0:
                raise ZeroDivisionError("QuadElem division by zero")
            return QuadElem._raw(self._a * d, self._b * d, self._d * a)
        return self * QuadElem._raw(a, b, d).inverse()

    def __rtruediv__(self, other):
        o = _coerce_parts(other)
        if o is None:
            return NotImplemented
        return QuadElem._raw(*o) * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.inverse()
        result = QuadElem._raw(1, 0, 1)
        for _ in range(abs(k)):
            result = result * base
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # comparison -------------------------------------------------------

    def __eq__(self, other):
        try:
            o = _coerce_parts(other)
        except ModeError:
            return False
        if o is None:
            return NotImplemented
        a, b, d = o
        return self._a * d == a * self._d and self._b * d == b * self._d

    def __lt__(self, other):
        o = _coerce_parts(other)
        if o is None:
            return NotImplemented
        return (self - QuadElem._raw(*o)).sign() < 0

    def __hash__(self):
        if self._b == 0:
            return hash(Fraction(self._a, self._d))
        return hash((self._a, self._b, self._d))

    def __bool__(self):
        return bool(self._a or self._b)

    def __float__(self):
        return quad_to_float(self)

    def __repr__(self):
        return f"QuadElem({str(self.p)!r}, {str(self.q)!r})"

    def __str__(self):
        return format_scalar(self)

    def __reduce__(self):
        return (QuadElem, (str(self.p), str(self.q)))


SQRT2 = QuadElem(0, 1)

Scalar = Union[Fraction, QuadElem, float]


def quad_to_float(x: QuadElem) -> float:
    """Correctly rounded binary64 value of ``p + q*sqrt(2)``.

    Encloses ``q*sqrt(2)`` with integer square roots at increasing
    precision until both ends of the enclosure round to the same double.
    Raises :class:`OverflowError` when the value exceeds the binary64 range.
    """
    if not isinstance(x, QuadElem):
        x = QuadElem(x)
    a, b, d = x._a, x._b, x._d
    if b == 0:
        return float(Fraction(a, d))
    s = 1 if b > 0 else -1
    bits = 64
    while True:
        scale = 1 << bits
        r = math.isqrt(2 * b * b * scale * scale)
        lo = Fraction(a * scale + s * r, d * scale)
        hi = Fraction(a * scale + s * (r + 1), d * scale)
        flo, fhi = float(lo), float(hi)
        if flo == fhi:
            return flo
        bits *= 2


def quad_sign(x: QuadElem) -> int:
    """Exact sign of ``p + q*sqrt(2)`` decided with integer arithmetic only."""
    if not isinstance(x, QuadElem):
        x = QuadElem(x)
    return x.sign()


def mode_of(x) -> str:
    if isinstance(x, QuadElem):
        return QUAD
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return EXACT
    if isinstance(x, float) or isinstance(x, numbers.Real):
        return FLOAT
    raise TypeError(f"not a scalar: {x!r}")


def common_mode(values: Iterable) -> str:
    """Mode shared by ``values``; rationals widen to quad, floats never mix."""
    modes = {mode_of(v) for v in values}
    if FLOAT in modes:
        if len(modes) > 1:
            raise ModeError(f"mixed scalar modes {sorted(modes)}")
        return FLOAT
    return QUAD if QUAD in modes else EXACT


def to_mode(x, mode: str):
    """Explicitly convert ``x`` into ``mode``."""
    if mode == FLOAT:
        return float(x)
    if isinstance(x, float):
        raise ModeError("refusing to convert a float into an exact mode")
    if mode == QUAD:
        return x if isinstance(x, QuadElem) else QuadElem(x)
    if mode == EXACT:
        if isinstance(x, QuadElem):
            if not x.is_rational:
                raise ModeError(f"{x} is not rational")
            return x.p
        return Fraction(x)
    raise ValueError(f"unknown mode {mode!r}")


def is_exact(x) -> bool:
    return mode_of(x) != FLOAT


def sign(x) -> int:
    if isinstance(x, QuadElem):
        return x.sign()
    return (x > 0) - (x < 0)


def format_scalar(x) -> str:
    """Text form used in JSON reports; inverse of :func:`parse_scalar`."""
    if isinstance(x, QuadElem):
        if x.q == 0:
            return str(x.p)
        q = x.q
        return f"{x.p}{'+' if q > 0 else '-'}{abs(q)}*sqrt(2)"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    return str(x)


_QUAD_RE = re.compile(
    r"^\s*(?P<p>[+-]?[0-9./]+)\s*(?P<s>[+-])\s*(?P<q>[0-9./]+)\s*\*\s*sqrt\(2\)\s*$"
)


def parse_scalar(text: str, mode: str = EXACT):
    """Parse a scalar written by :func:`format_scalar`."""
    text = str(text).strip()
    if mode == FLOAT:
        return float(text)
    m = _QUAD_RE.match(text)
    if m:
        q = parse_rational(m["q"])
        return QuadElem(parse_rational(m["p"]), q if m["s"] == "+" else -q)
    value = parse_rational(text)
    return QuadElem(value) if mode == QUAD else value
