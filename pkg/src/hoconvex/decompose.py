"""Lipschitz certificates, extension from rational grids, and f = g + P.

The pipeline mirrors the constructive route from Wright convexity to a
decomposition:

1. certify the sample on its rational sub-grid (``q = 0``) as n-Wright convex,
2. bound the Lipschitz modulus of that rational data from n-convexity alone
   (:func:`lipschitz_certificate`),
3. extend the rational data to a continuous function ``g_hat``
   (:func:`extend_from_rationals`),
4. take the residual ``f - g_hat`` at every module point and check that its
   (n+1)-fold differences with rational steps vanish.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

from .certify import (
    DEFAULT_BUDGET,
    ConvexityReport,
    certify_convex,
    certify_frechet,
    certify_wright,
    default_tolerance,
    merge_reports,
    step_multiples,
)
from .diffcore import GridFunction, difference_stencil, mixed_difference
from .errors import (
    ConsistencyError,
    DecompositionRejected,
    DomainError,
    UsageError,
)
from .scalar import FLOAT, QuadElem, common_mode, format_scalar, mode_of, to_mode

# ---------------------------------------------------------------------------
# exact polynomial helpers (coefficients low -> high, Fractions)
# ---------------------------------------------------------------------------


def poly_from_roots(roots: Sequence) -> list[Fraction]:
    coeffs = [Fraction(1)]
    for r in roots:
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] -= c * r
        coeffs = nxt
    return coeffs


def poly_eval(coeffs: Sequence, t):
    total = 0
    for c in reversed(coeffs):
        total = total * t + c
    return total


def poly_derivative(coeffs: Sequence) -> list[Fraction]:
    return [i * c for i, c in enumerate(coeffs)][1:]


def _coefficient_bound(coeffs: Sequence, radius: Fraction) -> Fraction:
    return sum((abs(c) * radius**i for i, c in enumerate(coeffs)), Fraction(0))


def _critical_intervals(coeffs: Sequence, a: Fraction, b: Fraction, eps: Fraction):
    """Rational isolating intervals for the real roots of ``P'`` inside ``[a, b]``."""
    import sympy

    deriv = poly_derivative(coeffs)
    while deriv and deriv[-1] == 0:
        deriv.pop()
    if len(deriv) <= 1:
        return []
    t = sympy.Symbol("t")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(deriv)], t)
    found = poly.intervals(eps=sympy.Rational(eps.numerator, eps.denominator),
                           inf=sympy.Rational(a.numerator, a.denominator),
                           sup=sympy.Rational(b.numerator, b.denominator))
    out = []
    for (lo, hi), _mult in found:
        out.append((Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))))
    return out


def abs_range(coeffs: Sequence, a: Fraction, b: Fraction, exact_extrema: bool = True,
              eps: Fraction = Fraction(1, 10**24)):
    """Rigorous ``(lower, upper)`` with ``lower <= |P(t)| <= upper`` on ``[a, b]``.

    Extrema sit at the endpoints or at roots of ``P'``; those roots are
    isolated in rational intervals of width ``eps`` and ``P`` is enclosed on
    each interval by a mean-value bound.  Without root isolation the upper
    bound falls back to ``sum |c_i| max(|a|, |b|)^i`` and the lower to 0.
    """
    radius = max(abs(a), abs(b))
    if not exact_extrema:
        return Fraction(0), _coefficient_bound(coeffs, radius)
    # enclose the signed range of P first; |P| bottoms out at 0 if it straddles zero
    pa, pb = poly_eval(coeffs, a), poly_eval(coeffs, b)
    low, high = min(pa, pb), max(pa, pb)
    deriv = poly_derivative(coeffs)
    for lo, hi in _critical_intervals(coeffs, a, b, eps):
        mid = (lo + hi) / 2
        slack = (hi - lo) / 2 * _coefficient_bound(deriv, max(abs(lo), abs(hi)))
        val = poly_eval(coeffs, mid)
        low, high = min(low, val - slack), max(high, val + slack)
    lower = Fraction(0) if low <= 0 <= high else min(abs(low), abs(high))
    return lower, max(abs(low), abs(high))


# ---------------------------------------------------------------------------
# Lipschitz certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LipschitzCertificate:
    a: Fraction
    b: Fraction
    n: int
    u: tuple
    u_prime: Fraction
    C_below: object
    C_above: object
    K: object
    K_proof: object
    M: object
    M0: object
    M1: object
    M2: object
    U_a: object
    U_b: object
    L: object
    empirical_slope: object

    def to_json(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if name == "u":
                out[name] = [format_scalar(v) for v in value]
            elif name == "n":
                out[name] = value
            else:
                out[name] = format_scalar(value)
        return out


def empirical_lipschitz(g: GridFunction):
    """Largest ``|f(y) - f(x)| / (y - x)`` over sample pairs (adjacent pairs suffice)."""
    return max(
        abs(v1 - v0) / (x1 - x0)
        for (x0, v0), (x1, v1) in zip(zip(g.points, g.values), zip(g.points[1:], g.values[1:]))
    )


def _phi_min(f: GridFunction, core: Sequence, anchors: Sequence):
    """Minimum over core pairs ``x < y`` of ``-sum_i f(w_i) / ((w_i-x)(w_i-y) prod_{j!=i}(w_i-w_j))``."""
    weights = []
    for i, w in enumerate(anchors):
        denom = math.prod(w - v for j, v in enumerate(anchors) if j != i)
        weights.append(f(w) / denom)
    inv = [[1 / (w - x) for w in anchors] for x in core]
    best = None
    for ix in range(len(core)):
        for iy in range(ix + 1, len(core)):
            val = 0
            for c, rx, ry in zip(weights, inv[ix], inv[iy]):
                val = val - c * rx * ry
            if best is None or val < best:
                best = val
    return best


def lipschitz_certificate(f: GridFunction, n: int, u: Sequence, u_prime, a=None, b=None,
                          exact_extrema: bool = True) -> LipschitzCertificate:
    """Lipschitz modulus of n-convex grid data on ``[a, b]`` from anchor nodes.

    ``u_1 < ... < u_n < a`` and ``u_prime > b`` must be sample points of
    ``f``.  ``a`` and ``b`` default to the first and last sample points
    strictly between ``u_n`` and ``u_prime``.  The lower constants are exact
    minima over sample pairs; ``M``, ``M0``, ``M1``, ``M2`` are rigorous
    bounds for ``|U'|``, ``|V|`` and ``|V'|`` on ``[a, b]``.
    """
    u = tuple(Fraction(x) for x in u)
    u_prime = Fraction(u_prime)
    if n < 1 or len(u) != n:
        raise UsageError(f"need exactly n = {n} >= 1 lower anchors, got {len(u)}")
    if any(not u[i] < u[i + 1] for i in range(n - 1)):
        raise UsageError("lower anchors must be strictly increasing")
    float_mode = f.mode == FLOAT
    inside = [x for x in f.points if u[-1] < x < u_prime]
    if a is None:
        if not inside:
            raise UsageError("no sample points between the anchors")
        a = inside[0]
    if b is None:
        if not inside:
            raise UsageError("no sample points between the anchors")
        b = inside[-1]
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        raise UsageError("degenerate interval: need a < b")
    if not u[-1] < a:
        raise UsageError("lower anchors must lie below a")
    if not u_prime > b:
        raise UsageError("upper anchor must lie above b")
    core = [x for x in f.points if a <= x <= b]
    if len(core) < 2:
        raise UsageError("need at least two sample points in [a, b]")
    if float_mode:
        conv = float
        anchors_lo = [float(x) for x in u]
        anchors_hi = [float(x) for x in u[:-1]] + [float(u_prime)]
    else:
        conv = lambda x: x  # noqa: E731
        anchors_lo = list(u)
        anchors_hi = list(u[:-1]) + [u_prime]

    C_below = _phi_min(f, core, anchors_lo)
    C_above = _phi_min(f, core, anchors_hi)
    K = max(abs(f(x)) for x in core)

    U = poly_from_roots(u)
    V = poly_from_roots(u[:-1] + (u_prime,))
    U_a, U_b = poly_eval(U, a), poly_eval(U, b)
    _, M = abs_range(poly_derivative(U), a, b, exact_extrema)
    M0, M1 = abs_range(V, a, b, exact_extrema)
    if M0 <= 0:
        # V has no roots in [a, b]; distance to the roots is always a valid floor
        M0 = math.prod(min(abs(a - r), abs(b - r)) for r in u[:-1] + (u_prime,))
    _, M2 = abs_range(poly_derivative(V), a, b, exact_extrema)

    span = conv(b - a)
    K_proof = max(
        conv(U_b / U_a) * abs(f(conv(a))) + conv(U_b) * abs(C_below) * span,
        abs(f(conv(b))) + conv(U_b) * abs(C_below) * span,
    )
    L = max(
        conv(M) * K / conv(U_a) + conv(U_b) * abs(C_below),
        conv(M2) * K / conv(M0) + conv(M1) * abs(C_above),
    )
    return LipschitzCertificate(
        a=a, b=b, n=n, u=u, u_prime=u_prime,
        C_below=C_below, C_above=C_above, K=K, K_proof=K_proof,
        M=conv(M), M0=conv(M0), M1=conv(M1), M2=conv(M2),
        U_a=conv(U_a), U_b=conv(U_b), L=L,
        empirical_slope=empirical_lipschitz(f.restrict(conv(a), conv(b))),
    )


# ---------------------------------------------------------------------------
# extension
# ---------------------------------------------------------------------------


def _lagrange(nodes: Sequence, values: Sequence, t):
    total = 0
    for j, (yj, vj) in enumerate(zip(nodes, values)):
        w = 1
        for m, ym in enumerate(nodes):
            if m != j:
                w = w * (t - ym) / (yj - ym)
        total = total + w * vj
    return total


def extend_from_rationals(grid: GridFunction, targets: Sequence, L=None, degree: int = 1) -> list:
    """Values at ``targets`` of the continuous extension of the grid data.

    ``degree=1`` is the piecewise-linear interpolant: it agrees with the data
    at grid points, is L-Lipschitz whenever the data are, and stays within
    ``L * mesh`` of any L-Lipschitz function through the data.  Higher
    degrees interpolate by polynomials on consecutive blocks of ``degree``
    mesh cells, which reproduces every polynomial of that degree exactly.

    On a float grid, exact targets (e.g. quad elements) are rounded to
    binary64 before locating them.
    """
    points, values = grid.points, grid.values
    if degree < 1 or len(points) - 1 < degree:
        raise UsageError(f"need at least {degree + 1} grid points for degree {degree}")
    float_mode = grid.mode == FLOAT
    if L is not None:
        slack = 1e-9 * (1.0 + abs(L)) if float_mode else 0
        for i in range(len(points) - 1):
            slope = abs(values[i + 1] - values[i]) / (points[i + 1] - points[i])
            if slope > L + slack:
                raise ConsistencyError(
                    f"data between {points[i]} and {points[i + 1]} has slope {slope} > L = {L}",
                    pair=(points[i], points[i + 1]),
                )
    last = len(points) - 1
    out = []
    for t in targets:
        if float_mode and mode_of(t) != FLOAT:
            t = float(t)
        if t < points[0] or t > points[-1]:
            raise DomainError(f"target {t} outside the grid hull", point=t)
        j = bisect.bisect_left(points, t)
        if j <= last and points[j] == t:
            out.append(values[j])
            continue
        cell = j - 1
        start = (cell // degree) * degree
        if start + degree > last:
            start = last - degree
        window = slice(start, start + degree + 1)
        out.append(_lagrange(points[window], values[window], t))
    return out


def extension_error_bound(L, mesh, degree: int = 1):
    """Distance bound between the extension and any L-Lipschitz function through the data.

    Linear interpolation stays within ``L * mesh``; a degree-d block
    interpolant within ``Lambda * d * L * mesh`` where the Lebesgue constant
    of d+1 equispaced nodes is bounded by ``2**d``.
    """
    if degree == 1:
        return L * mesh
    return 2**degree * degree * L * mesh


# ---------------------------------------------------------------------------
# module samples and decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModuleSamples:
    """Samples of f at points ``p + q sqrt 2``, sorted by real value."""

    points: tuple
    values: tuple
    interval: tuple | None = None

    def __post_init__(self):
        pairs = sorted(
            ((p if isinstance(p, QuadElem) else QuadElem(p), v) for p, v in zip(self.points, self.values)),
            key=lambda pv: pv[0],
        )
        if len(pairs) != len(self.points) or len(self.points) != len(self.values):
            raise UsageError("points and values differ in length")
        for (x0, _), (x1, _) in zip(pairs, pairs[1:]):
            if x0 == x1:
                raise UsageError(f"duplicate module point {x0}")
        object.__setattr__(self, "points", tuple(p for p, _ in pairs))
        object.__setattr__(self, "values", tuple(v for _, v in pairs))
        common_mode(self.values)

    @property
    def value_mode(self) -> str:
        return common_mode(self.values)

    def _point(self, x):
        return float(x) if self.value_mode == FLOAT else (x.p if x.is_rational else x)

    def rational_grid(self) -> GridFunction:
        pts = [(x, v) for x, v in zip(self.points, self.values) if x.is_rational]
        if len(pts) < 2:
            raise UsageError("the sample has no rational (q = 0) sub-grid")
        return GridFunction(tuple(self._point(x) for x, _ in pts), tuple(v for _, v in pts))

    def lines(self) -> dict:
        """Samples grouped by ``q``, each line sorted by ``p``."""
        out: dict = {}
        for x, v in zip(self.points, self.values):
            out.setdefault(x.q, []).append((x, v))
        return dict(sorted(out.items()))

    def as_grid(self, values=None) -> GridFunction:
        values = self.values if values is None else values
        return GridFunction(tuple(self._point(x) for x in self.points), tuple(values))


@dataclass
class DecompositionResult:
    g_values: list
    residual: list
    frechet_report: ConvexityReport
    g_report: ConvexityReport
    extension_error_bound: object
    lipschitz_certificate: LipschitzCertificate | None
    wright_report: ConvexityReport
    extension_degree: int = 1
    lipschitz_modulus: object = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "g": [[format_scalar(x), format_scalar(v)] for x, v in self.g_values],
            "residual": [
                [format_scalar(x.p), format_scalar(x.q), format_scalar(v)] for x, v in self.residual
            ],
            "frechet_report": self.frechet_report.to_json(),
            "g_report": self.g_report.to_json(),
            "extension_error_bound": format_scalar(self.extension_error_bound),
            "lipschitz_certificate": (
                None if self.lipschitz_certificate is None else self.lipschitz_certificate.to_json()
            ),
            "wright_report": self.wright_report.to_json(),
            "extension_degree": self.extension_degree,
            "lipschitz_modulus": format_scalar(self.lipschitz_modulus),
        }


def decompose(samples: ModuleSamples, n: int, mesh=None, tol=None, budget=DEFAULT_BUDGET,
              targets: Sequence = (), workers: int = 1, extension_degree: int | None = None
              ) -> DecompositionResult:
    """Split module samples of an n-Wright convex f into ``g_hat + residual``.

    ``g_hat`` is the continuous extension of f's rational sub-grid, so the
    residual vanishes on every rational sample point by construction.  The
    extension interpolates with polynomials of degree ``n`` on blocks of
    ``n`` mesh cells (linear when ``n = 1``).

    Raises :class:`DecompositionRejected` when the rational sub-grid is not
    n-Wright convex.
    """
    if n < 1:
        raise UsageError("order must be at least 1")
    rgrid = samples.rational_grid()
    if len(rgrid) < n + 2:
        raise UsageError(f"rational sub-grid has {len(rgrid)} points; need at least {n + 2}")
    grid_mesh = rgrid.mesh
    if grid_mesh is None:
        raise UsageError("the rational sub-grid is not equally spaced")
    if mesh is not None:
        if rgrid.mode == FLOAT:
            same = abs(grid_mesh - float(mesh)) <= 1e-9 * float(mesh)
        else:
            same = grid_mesh == Fraction(mesh)
        if not same:
            raise UsageError(f"rational sub-grid mesh {grid_mesh} differs from requested {mesh}")

    wright = certify_wright(rgrid, n, budget=budget, workers=workers)
    if wright.violated:
        raise DecompositionRejected(
            f"rational data are not {n}-Wright convex; witness {wright.witness}", report=wright
        )

    float_mode = rgrid.mode == FLOAT
    L = empirical_lipschitz(rgrid)
    certificate = None
    if len(rgrid) >= n + 3:
        exact_pts = [Fraction(p) for p in rgrid.points]
        certificate = lipschitz_certificate(
            rgrid, n, exact_pts[:n], exact_pts[-1], exact_pts[n], exact_pts[-2]
        )
        L = max(L, certificate.L)

    degree = extension_degree or n
    all_targets = list(samples.points) + list(targets)
    g_all = extend_from_rationals(rgrid, all_targets, L=L, degree=degree)
    g_samples = g_all[: len(samples.points)]
    residual = [(x, v - gv) for x, v, gv in zip(samples.points, samples.values, g_samples)]
    for x, r in residual:
        if x.is_rational and r != 0:
            raise ConsistencyError(f"residual {r} at rational point {x}", pair=(x, x))
    bound = extension_error_bound(L, grid_mesh, degree)

    if tol is None and float_mode:
        frechet_tol = 2 ** (n + 1) * bound + default_tolerance(rgrid)
    else:
        frechet_tol = tol
    res = dict(residual)
    line_reports = []
    for q, line in samples.lines().items():
        if len(line) < n + 2:
            continue
        lg = GridFunction(
            tuple(samples._point(x) for x, _ in line), tuple(res[x] for x, _ in line)
        )
        line_reports.append(
            certify_frechet(lg, n, frechet_tol, mixed=True, budget=budget, exhaustive=False)
        )
    frechet_report = merge_reports(line_reports)

    g_grid = samples.as_grid(g_samples)
    g_report = certify_convex(g_grid, n, budget=budget, workers=workers)

    return DecompositionResult(
        g_values=list(zip(all_targets, g_all)),
        residual=residual,
        frechet_report=frechet_report,
        g_report=g_report,
        extension_error_bound=bound,
        lipschitz_certificate=certificate,
        wright_report=wright,
        extension_degree=degree,
        lipschitz_modulus=L,
    )


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class VerificationReport:
    passed: bool
    sum_identity: bool
    difference_agreement: ConvexityReport
    monotone_ok: bool
    monotone_margin: object
    monotone_witness: tuple
    monotone_tested: int

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "sum_identity": self.sum_identity,
            "difference_agreement": self.difference_agreement.to_json(),
            "monotone": {
                "ok": self.monotone_ok,
                "worst_increment": None if self.monotone_margin is None else format_scalar(self.monotone_margin),
                "witness": [format_scalar(w) for w in self.monotone_witness],
                "tested_count": self.monotone_tested,
            },
        }


def _monotone_sweep(f: GridFunction, n: int, budget):
    """Worst ``D(x_{i+1}) - D(x_i)`` for ``D = Delta_{h_1} ... Delta_{h_n} f``."""
    mesh = f.mesh
    size = len(f)
    values = f.values
    best, witness, count = None, (), 0
    for mults in step_multiples(n, size - 2):
        stencil = difference_stencil(mults + (1,))
        for i in range(size - sum(mults) - 1):
            if budget is not None and count >= budget:
                return best, witness, count
            inc = 0
            for off, c in stencil:
                inc = inc + c * values[i + off]
            count += 1
            if best is None or inc < best:
                best, witness = inc, (f.points[i],) + tuple(m * mesh for m in mults)
    return best, witness, count


def verify_decomposition(f: GridFunction, g: GridFunction, n: int, tol=None,
                         budget=DEFAULT_BUDGET) -> VerificationReport:
    """Check ``f = g + (f - g)`` and that all rational-step (n+1)-fold differences agree.

    Also checks the consequence of Wright convexity that
    ``x -> Delta_{h_1} ... Delta_{h_n} f(x)`` is nondecreasing along the grid.
    """
    if tuple(f.points) != tuple(g.points):
        raise UsageError("f and g must be sampled at the same points")
    if f.mesh is None:
        raise UsageError("verification sweeps need an equally spaced grid")
    residual = tuple(fv - gv for fv, gv in zip(f.values, g.values))
    sum_identity = all(gv + r == fv for fv, gv, r in zip(f.values, g.values, residual)) \
        if f.mode != FLOAT else True
    rgrid = GridFunction(f.points, residual, f.interval)
    if tol is None:
        tol = default_tolerance(f) if f.mode == FLOAT else Fraction(0)
    difference_agreement = certify_frechet(rgrid, n, tol, mixed=True, budget=budget)
    inc, witness, count = _monotone_sweep(f, n, budget)
    monotone_ok = inc is None or not inc < -tol
    return VerificationReport(
        passed=sum_identity and difference_agreement.certified and monotone_ok,
        sum_identity=sum_identity,
        difference_agreement=difference_agreement,
        monotone_ok=monotone_ok,
        monotone_margin=inc,
        monotone_witness=witness,
        monotone_tested=count,
    )


class SandwichBounds(NamedTuple):
    lower: object
    value: object
    upper: object

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def contains(self) -> bool:
        return self.lower <= self.value <= self.upper


def sandwich_bound_check(f: Callable, g: Callable, steps: Sequence, x, k: int, h_lo, h_hi
                         ) -> SandwichBounds:
    """Bracket ``Delta_{steps} f(x)`` by g-differences with slot ``k`` set to rationals.

    Returns ``(lower, value, upper)``: ``lower`` and ``upper`` use ``h_lo`` and
    ``h_hi`` in slot ``k`` and difference ``g``; ``value`` differences ``f``
    with the original steps.  For n-Wright convex f agreeing with g on the
    rationals, ``lower <= value <= upper``.
    """
    steps = list(steps)
    if not 0 <= k < len(steps):
        raise UsageError(f"slot {k} out of range for {len(steps)} steps")
    h_lo, h_hi = Fraction(h_lo), Fraction(h_hi)
    if not (0 < h_lo):
        raise UsageError("h_lo must be positive")
    mode = mode_of(steps[k])
    lo = to_mode(h_lo, mode) if mode == FLOAT else h_lo
    hi = to_mode(h_hi, mode) if mode == FLOAT else h_hi
    if not (lo < steps[k] < hi):
        raise UsageError(f"need h_lo < steps[{k}] < h_hi")
    lower_steps = steps[:k] + [lo] + steps[k + 1:]
    upper_steps = steps[:k] + [hi] + steps[k + 1:]
    return SandwichBounds(
        mixed_difference(g, lower_steps, x),
        mixed_difference(f, steps, x),
        mixed_difference(g, upper_steps, x),
    )


__all__ = [
    "DecompositionResult",
    "LipschitzCertificate",
    "ModuleSamples",
    "SandwichBounds",
    "VerificationReport",
    "abs_range",
    "decompose",
    "empirical_lipschitz",
    "extend_from_rationals",
    "extension_error_bound",
    "lipschitz_certificate",
    "sandwich_bound_check",
    "verify_decomposition",
]
