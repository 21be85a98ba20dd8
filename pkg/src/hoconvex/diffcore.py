"""Difference calculus: divided differences and forward difference operators.

Every operation takes the sampled function as a plain callable.  A
:class:`GridFunction` is callable too, but only at its sample points: asking
it for any other point raises :class:`DomainError` instead of interpolating.
"""

from __future__ import annotations

import bisect
import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

from .errors import DomainError, ModeError, UsageError
from .scalar import EXACT, FLOAT, QUAD, QuadElem, common_mode, mode_of, sign

MAX_MIXED_ORDER = 16
FLOAT_REL_TOL = 1e-9


@dataclass(frozen=True)
class GridFunction:
    """Finite sample ``{(x_i, f(x_i))}`` of a function on an open interval.

    ``interval`` defaults to the sample hull widened by one spacing on each
    side, so that every point lies strictly inside.
    """

    points: tuple
    values: tuple
    interval: tuple | None = None
    mode: str = field(init=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        points, values = tuple(self.points), tuple(self.values)
        points, values = tuple(_exact(points)), tuple(_exact(values))
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)
        if len(points) != len(values):
            raise UsageError(f"{len(points)} points but {len(values)} values")
        if len(points) < 2:
            raise UsageError("a grid function needs at least two points")
        mode = common_mode(points + values + tuple(self.interval or ()))
        for i in range(len(points) - 1):
            if not points[i] < points[i + 1]:
                raise UsageError(
                    f"points must be strictly increasing (index {i + 1}: {points[i + 1]})"
                )
        if self.interval is None:
            a = points[0] - (points[1] - points[0])
            b = points[-1] + (points[-1] - points[-2])
            object.__setattr__(self, "interval", (a, b))
        else:
            a, b = self.interval
            object.__setattr__(self, "interval", (a, b))
            if not (a < points[0] and points[-1] < b):
                raise UsageError("all points must lie strictly inside the interval")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(points)})

    @classmethod
    def from_function(cls, f: Callable, points: Sequence, interval=None) -> GridFunction:
        points = tuple(points)
        return cls(points, tuple(f(x) for x in points), interval)

    def __len__(self) -> int:
        return len(self.points)

    def index_of(self, x) -> int:
        """Index of the sample point equal to ``x``; float grids snap rounding noise."""
        i = self._index.get(x)
        if i is not None:
            return i
        if self.mode == FLOAT:
            if mode_of(x) != FLOAT:
                raise ModeError("exact lookup point on a float grid")
            j = bisect.bisect_left(self.points, x)
            snap = FLOAT_REL_TOL * self._min_gap()
            for k in (j - 1, j):
                if 0 <= k < len(self.points) and abs(self.points[k] - x) <= snap:
                    return k
        raise DomainError(f"{x} is not a sample point", point=x)

    def __call__(self, x):
        return self.values[self.index_of(x)]

    def _min_gap(self):
        return min(b - a for a, b in zip(self.points, self.points[1:]))

    @property
    def mesh(self):
        """Common spacing of a uniform grid, ``None`` otherwise."""
        gaps = [b - a for a, b in zip(self.points, self.points[1:])]
        first = gaps[0]
        if self.mode == FLOAT:
            step = (self.points[-1] - self.points[0]) / (len(self.points) - 1)
            if all(abs(g - step) <= FLOAT_REL_TOL * abs(step) for g in gaps):
                return step
            return None
        if not all(g == first for g in gaps):
            return None
        if isinstance(first, QuadElem) and first.is_rational:
            return first.p
        return first

    @property
    def is_uniform(self) -> bool:
        return self.mesh is not None

    def max_abs_value(self):
        return max(abs(v) for v in self.values)

    def restrict(self, lo, hi) -> GridFunction:
        """Sub-sample on the closed range ``[lo, hi]``."""
        pairs = [(x, v) for x, v in zip(self.points, self.values) if lo <= x <= hi]
        return GridFunction(tuple(p for p, _ in pairs), tuple(v for _, v in pairs), self.interval)


def _exact(xs) -> list:
    # plain ints would fall into float true division
    return [Fraction(x) if type(x) is int else x for x in xs]


def _check_same_length(points, values):
    if len(points) != len(values):
        raise UsageError(f"{len(points)} points but {len(values)} values")
    if not points:
        raise UsageError("divided difference of an empty node set")


def _check_distinct(points):
    if len(set(points)) != len(points):
        seen = set()
        for x in points:
            if x in seen:
                raise DomainError(f"repeated node {x}", point=x)
            seen.add(x)


def divided_difference_direct(points: Sequence, values: Sequence):
    """``[x_0, ..., x_n; f]`` as the sum of ``f(x_i) / prod_{j!=i} (x_i - x_j)``."""
    _check_same_length(points, values)
    _check_distinct(points)
    points, values = _exact(points), _exact(values)
    total = 0
    for i, (xi, fi) in enumerate(zip(points, values)):
        denom = math.prod(xi - xj for j, xj in enumerate(points) if j != i)
        total = total + fi / denom
    return total


def divided_difference_recursive(points: Sequence, values: Sequence):
    """``[x_0, ..., x_n; f]`` by the Newton table recursion."""
    _check_same_length(points, values)
    _check_distinct(points)
    points, column = _exact(points), _exact(values)
    for level in range(1, len(points)):
        column = [
            (column[i + 1] - column[i]) / (points[i + level] - points[i])
            for i in range(len(column) - 1)
        ]
    return column[0]


def divided_difference(points: Sequence, values: Sequence, method: str | None = None):
    """Dispatch on ``method``; the Newton table is the float-mode default."""
    if method is None:
        method = "recursive" if common_mode(tuple(points) + tuple(values)) == FLOAT else "direct"
    if method == "direct":
        return divided_difference_direct(points, values)
    if method == "recursive":
        return divided_difference_recursive(points, values)
    raise UsageError(f"unknown divided-difference method {method!r}")


def _check_step(h):
    if sign(h) <= 0:
        raise UsageError(f"steps must be strictly positive, got {h}")


def difference_stencil(steps: Sequence) -> list[tuple]:
    """``(offset, coefficient)`` pairs of ``Delta_{h_1} ... Delta_{h_k}``.

    Coincident offsets are merged, so equal steps give binomial weights.
    """
    terms = {0: 1}
    for h in steps:
        nxt: dict = {}
        for off, c in terms.items():
            nxt[off + h] = nxt.get(off + h, 0) + c
            nxt[off] = nxt.get(off, 0) - c
        terms = {off: c for off, c in nxt.items() if c}
    return list(terms.items())


def forward_difference(f: Callable, h, x):
    """``Delta_h f(x) = f(x + h) - f(x)``."""
    _check_step(h)
    return f(x + h) - f(x)


def mixed_difference(f: Callable, steps: Sequence, x):
    """``Delta_{h_1} ... Delta_{h_k} f(x)`` by inclusion-exclusion over 2^k nodes."""
    if len(steps) > MAX_MIXED_ORDER:
        raise UsageError(f"at most {MAX_MIXED_ORDER} steps supported, got {len(steps)}")
    for h in steps:
        _check_step(h)
    total = 0
    for off, c in difference_stencil(steps):
        total = total + c * f(x + off)
    return total


def iterated_difference(f: Callable, h, k: int, x):
    """``Delta_h^k f(x) = sum_j (-1)^(k-j) C(k, j) f(x + j h)``."""
    if k < 0:
        raise UsageError("difference order must be nonnegative")
    _check_step(h)
    total = 0
    for j in range(k + 1):
        total = total + (-1) ** (k - j) * math.comb(k, j) * f(x + j * h)
    return total


class IdentityCheck(NamedTuple):
    lhs: object
    rhs: object
    equal: bool
    margin: object


def identity_check(f: Callable, x, h, n: int) -> IdentityCheck:
    """Compare ``[x, x+h, ..., x+(n+1)h; f]`` with ``Delta_h^{n+1} f(x) / ((n+1)! h^{n+1})``.

    Exact modes demand equality; float mode accepts a relative gap of
    ``1e-9 * max(1, |lhs|, |rhs|)``.
    """
    if n < 0:
        raise UsageError("order must be nonnegative")
    _check_step(h)
    x, h = _exact((x, h))
    nodes = [x + j * h for j in range(n + 2)]
    lhs = divided_difference(nodes, [f(t) for t in nodes])
    rhs = iterated_difference(f, h, n + 1, x) / (math.factorial(n + 1) * h ** (n + 1))
    margin = lhs - rhs
    if mode_of(margin) == FLOAT:
        equal = abs(margin) <= FLOAT_REL_TOL * max(1.0, abs(lhs), abs(rhs))
    else:
        equal = margin == 0
    return IdentityCheck(lhs, rhs, equal, margin)


__all__ = [
    "EXACT",
    "QUAD",
    "FLOAT",
    "GridFunction",
    "IdentityCheck",
    "MAX_MIXED_ORDER",
    "difference_stencil",
    "divided_difference",
    "divided_difference_direct",
    "divided_difference_recursive",
    "forward_difference",
    "identity_check",
    "iterated_difference",
    "mixed_difference",
]
