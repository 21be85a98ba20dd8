"""Certifiers for higher-order Jensen, Wright and Popoviciu convexity.

Each certifier sweeps a finite, deterministic set of argument tuples drawn
from a :class:`GridFunction` and reports the worst value found.  A verdict
of ``"certified"`` only ever speaks about that sweep set: every tested
tuple satisfied the inequality and the enumeration ran to completion.

Uniform grids are swept by index: steps are positive multiples of the mesh
and the sweep visits step tuples in lexicographic order (nondecreasing
tuples only, since mixed differences do not depend on step order), then the
base point from left to right.  The first tuple attaining the running
minimum is the witness.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .diffcore import (
    GridFunction,
    difference_stencil,
    divided_difference,
    divided_difference_recursive,
    iterated_difference,
    mixed_difference,
)
from .errors import DomainError, UsageError
from .scalar import FLOAT, format_scalar, sign

DEFAULT_BUDGET = 10**6
FLOAT_TOL_SCALE = 1e-9

CERTIFIED = "certified"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass
class ConvexityReport:
    notion: str
    order: int
    verdict: str
    worst_margin: object
    witness: tuple
    tested_count: int
    budget_exhausted: bool
    tolerance: object = 0
    sweep: dict = field(default_factory=dict)
    profile: dict | None = field(default=None, repr=False)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    @property
    def violated(self) -> bool:
        return self.verdict == VIOLATED

    def to_json(self) -> dict:
        return {
            "notion": self.notion,
            "order": self.order,
            "verdict": self.verdict,
            "worst_margin": None if self.worst_margin is None else format_scalar(self.worst_margin),
            "witness": [format_scalar(w) for w in self.witness],
            "tested_count": self.tested_count,
            "budget_exhausted": self.budget_exhausted,
            "tolerance": format_scalar(self.tolerance),
            "sweep": self.sweep,
        }


def default_tolerance(g: GridFunction):
    """0 in exact modes, ``1e-9 * (1 + max|f|)`` in float mode."""
    if g.mode == FLOAT:
        return FLOAT_TOL_SCALE * (1.0 + g.max_abs_value())
    return Fraction(0)


def _resolve_tol(g: GridFunction, tol):
    if tol is None:
        return default_tolerance(g)
    if sign(tol) < 0:
        raise UsageError("tolerance must be nonnegative")
    return float(tol) if g.mode == FLOAT else tol


def _verdict(worst, tol, complete: bool, maximize: bool) -> str:
    if worst is not None and (worst > tol if maximize else worst < -tol):
        return VIOLATED
    return CERTIFIED if complete else INCONCLUSIVE


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def step_multiples(k: int, max_sum: int, equal: bool = False) -> Iterator[tuple]:
    """Nondecreasing ``k``-tuples of positive integers with sum ``<= max_sum``."""
    if k == 0:
        yield ()
        return
    if equal:
        for m in range(1, max_sum // k + 1):
            yield (m,) * k
        return

    def rec(prefix: tuple, lo: int, slots: int, room: int):
        if slots == 0:
            yield prefix
            return
        for m in range(lo, room // slots + 1):
            yield from rec(prefix + (m,), m, slots - 1, room - m)

    yield from rec((), 1, k, max_sum)


def _truncate(units: Iterable[tuple], budget: int | None):
    """Cut ``(unit, count)`` pairs at ``budget`` tuples.

    Returns the kept ``(unit, take)`` list and whether anything was dropped.
    """
    kept, total = [], 0
    it = iter(units)
    for unit, count in it:
        if count <= 0:
            continue
        if budget is not None and total + count > budget:
            take = budget - total
            if take > 0:
                kept.append((unit, take))
            return kept, True
        kept.append((unit, count))
        total += count
        if budget is not None and total == budget:
            exhausted = any(c > 0 for _, c in it)
            return kept, exhausted
    return kept, False


def _chunks(kept: list, workers: int) -> list[list]:
    if workers <= 1 or len(kept) <= 1:
        return [kept]
    total = sum(c for _, c in kept)
    target = max(1, total // (4 * workers))
    chunks, current, acc = [], [], 0
    for unit in kept:
        current.append(unit)
        acc += unit[1]
        if acc >= target:
            chunks.append(current)
            current, acc = [], 0
    if current:
        chunks.append(current)
    return chunks


def _run(evaluate: Callable, payload, kept: list, workers: int) -> list:
    chunks = _chunks(kept, workers)
    if len(chunks) == 1:
        return [evaluate(payload, chunks[0])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(evaluate, itertools.repeat(payload), chunks))


def _merge(results: list):
    """Combine chunk results in enumeration order; earlier wins ties."""
    best, witness, count, profile = None, None, 0, {}
    for b, w, c, prof in results:
        count += c
        if b is not None and (best is None or b < best):
            best, witness = b, w
        for key, val in prof.items():
            if key not in profile or val < profile[key]:
                profile[key] = val
    return best, witness, count, profile


def _eval_stencil_chunk(payload, chunk):
    values, maximize, want_profile = payload
    best, witness, count, profile = None, None, 0, {}
    for (mults, stencil), take in chunk:
        for i in range(take):
            margin = 0
            for off, c in stencil:
                margin = margin + c * values[i + off]
            score = -abs(margin) if maximize else margin
            count += 1
            if best is None or score < best:
                best, witness = score, (i, mults)
            if want_profile and (i not in profile or score < profile[i]):
                profile[i] = score
    return best, witness, count, profile


def _uniform_sweep(g: GridFunction, k: int, equal: bool, budget, workers, maximize, want_profile):
    n_points = len(g)

    def units():
        for mults in step_multiples(k, n_points - 1, equal=equal):
            yield (mults, difference_stencil(mults)), n_points - sum(mults)

    kept, exhausted = _truncate(units(), budget)
    results = _run(_eval_stencil_chunk, (g.values, maximize, want_profile), kept, workers)
    best, witness, count, profile = _merge(results)
    mesh = g.mesh
    if witness is not None:
        i, mults = witness
        witness = (g.points[i],) + tuple(m * mesh for m in mults)
    profile = {g.points[i]: v for i, v in sorted(profile.items())}
    return best, witness, count, exhausted, profile


def _gaps(g: GridFunction) -> list:
    return sorted({b - a for a, b in itertools.combinations(g.points, 2)})


def _general_sweep(g: GridFunction, k: int, equal: bool, budget, maximize, want_profile):
    """Sweep a non-uniform grid with steps drawn from pairwise gaps."""
    gaps = _gaps(g)
    if equal:
        step_tuples = ((h,) * k for h in gaps)
    else:
        step_tuples = itertools.combinations_with_replacement(gaps, k)
    best, witness, count, profile = None, None, 0, {}
    exhausted = False
    for steps in step_tuples:
        for x in g.points:
            if budget is not None and count >= budget:
                exhausted = True
                break
            try:
                margin = mixed_difference(g, steps, x)
            except DomainError:
                continue
            score = -abs(margin) if maximize else margin
            count += 1
            if best is None or score < best:
                best, witness = score, (x,) + tuple(steps)
            if want_profile and (x not in profile or score < profile[x]):
                profile[x] = score
        if exhausted:
            break
    return best, witness, count, exhausted, dict(sorted(profile.items()))


def _difference_certifier(notion, g, n, tol, *, equal, maximize, budget, exhaustive, workers, profile):
    if n < 0:
        raise UsageError("order must be nonnegative")
    if len(g) < n + 2:
        raise UsageError(f"need at least {n + 2} points for order {n}, got {len(g)}")
    tol = _resolve_tol(g, tol)
    mesh = g.mesh
    if mesh is not None:
        best, witness, count, exhausted, prof = _uniform_sweep(
            g, n + 1, equal, budget, workers, maximize, profile
        )
        complete = not exhausted
        sweep = {"kind": "uniform-grid", "mesh": format_scalar(mesh)}
    else:
        if exhaustive:
            raise UsageError(
                "exhaustive sweeps need an equally spaced grid; pass exhaustive=False"
            )
        best, witness, count, exhausted, prof = _general_sweep(
            g, n + 1, equal, budget, maximize, profile
        )
        complete = False
        sweep = {"kind": "pairwise-gaps"}
    sweep.update(
        points=len(g),
        budget=budget,
        max_step_multiple=len(g) - 1,
        step_tuples="equal" if equal else "nondecreasing",
    )
    worst = -best if maximize and best is not None else best
    if maximize:
        prof = {x: -v for x, v in prof.items()}
    return ConvexityReport(
        notion=notion,
        order=n,
        verdict=_verdict(worst, tol, complete, maximize),
        worst_margin=worst,
        witness=witness or (),
        tested_count=count,
        budget_exhausted=exhausted,
        tolerance=tol,
        sweep=sweep,
        profile=prof if profile else None,
    )


# ---------------------------------------------------------------------------
# public certifiers
# ---------------------------------------------------------------------------


def certify_jensen(g: GridFunction, n: int, tol=None, *, budget=None, exhaustive=True,
                   workers=1, profile=False) -> ConvexityReport:
    """Minimum of ``Delta_h^{n+1} f(x)`` over on-grid ``(x, h)``; witness ``(x, h)``."""
    return _difference_certifier(
        "jensen", g, n, tol, equal=True, maximize=False, budget=budget,
        exhaustive=exhaustive, workers=workers, profile=profile,
    )


def certify_wright(g: GridFunction, n: int, tol=None, budget=DEFAULT_BUDGET, *,
                   exhaustive=True, workers=1, profile=False) -> ConvexityReport:
    """Minimum of ``Delta_{h_1} ... Delta_{h_{n+1}} f(x)``; witness ``(x, h_1, ..., h_{n+1})``."""
    if budget is not None and budget < 1:
        raise UsageError("budget must be at least 1")
    return _difference_certifier(
        "wright", g, n, tol, equal=False, maximize=False, budget=budget,
        exhaustive=exhaustive, workers=workers, profile=profile,
    )


def certify_frechet(g: GridFunction, n: int, tol=None, *, mixed=False, budget=None,
                    exhaustive=True, workers=1, profile=False) -> ConvexityReport:
    """Largest ``|Delta_h^{n+1} f(x)|`` over the sweep.

    Unlike the inequality certifiers, ``worst_margin`` here is a maximum of
    absolute values; the verdict is violated iff it exceeds ``tol``.  With
    ``mixed=True`` the sweep covers unequal step tuples as well.
    """
    return _difference_certifier(
        "frechet", g, n, tol, equal=not mixed, maximize=True, budget=budget,
        exhaustive=exhaustive, workers=workers, profile=profile,
    )


def _inverse_differences(points):
    n = len(points)
    table = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = Fraction(1) / (points[i] - points[j])
            table[i][j] = d
            table[j][i] = -d
    return table


def _eval_subset_chunk(payload, chunk):
    points, values, k, inverse, want_profile = payload
    n_points = len(points)
    best, witness, count, profile = None, None, 0, {}
    for i0, take in chunk:
        combos = itertools.islice(itertools.combinations(range(i0 + 1, n_points), k - 1), take)
        for rest in combos:
            idx = (i0,) + rest
            if inverse is None:
                margin = divided_difference_recursive(
                    [points[i] for i in idx], [values[i] for i in idx]
                )
            else:
                margin = 0
                for i in idx:
                    term = values[i]
                    row = inverse[i]
                    for j in idx:
                        if j != i:
                            term = term * row[j]
                    margin = margin + term
            count += 1
            if best is None or margin < best:
                best, witness = margin, idx
            if want_profile and (i0 not in profile or margin < profile[i0]):
                profile[i0] = margin
    return best, witness, count, profile


def certify_convex(g: GridFunction, n: int, tol=None, budget=DEFAULT_BUDGET, *,
                   workers=1, profile=False) -> ConvexityReport:
    """Minimum ``(n+1)``-st divided difference over ``(n+2)``-subsets of the sample.

    Subsets are visited in lexicographic index order; the grid may be
    non-uniform.  Exact modes use the definitional sum with a precomputed
    table of reciprocal node gaps, float mode the Newton table.
    """
    if n < 0:
        raise UsageError("order must be nonnegative")
    if budget is not None and budget < 1:
        raise UsageError("budget must be at least 1")
    k = n + 2
    n_points = len(g)
    if n_points < k:
        raise UsageError(f"need at least {k} points for order {n}, got {n_points}")
    tol = _resolve_tol(g, tol)
    units = ((i0, math.comb(n_points - 1 - i0, k - 1)) for i0 in range(n_points - k + 1))
    kept, exhausted = _truncate(units, budget)
    inverse = None if g.mode == FLOAT else _inverse_differences(g.points)
    payload = (g.points, g.values, k, inverse, profile)
    best, witness, count, prof = _merge(_run(_eval_subset_chunk, payload, kept, workers))
    if witness is not None:
        witness = tuple(g.points[i] for i in witness)
    return ConvexityReport(
        notion="convex",
        order=n,
        verdict=_verdict(best, tol, not exhausted, maximize=False),
        worst_margin=best,
        witness=witness or (),
        tested_count=count,
        budget_exhausted=exhausted,
        tolerance=tol,
        sweep={
            "kind": "subsets",
            "points": n_points,
            "subset_size": k,
            "budget": budget,
            "total_subsets": math.comb(n_points, k),
        },
        profile={g.points[i]: v for i, v in sorted(prof.items())} if profile else None,
    )


def certify_rn_convex(f: Callable, x, h, r: Sequence):
    """``[x, x + r_0 h, x + (r_0 + r_1) h, ...; f]`` for positive rational ``r``.

    Returns the divided difference itself; its sign is the caller's verdict.
    """
    if len(r) < 1:
        raise UsageError("r must hold at least one ratio")
    if sign(h) <= 0 or any(sign(ri) <= 0 for ri in r):
        raise UsageError("h and every r_i must be strictly positive")
    nodes = [x]
    acc = 0
    for ri in r:
        acc = acc + ri
        nodes.append(x + acc * h)
    return divided_difference(nodes, [f(t) for t in nodes])


def replay_witness(report: ConvexityReport, f: Callable):
    """Recompute the tested quantity at ``report.witness``."""
    n = report.order
    w = report.witness
    if report.notion == "convex":
        return divided_difference(list(w), [f(t) for t in w])
    if report.notion == "jensen":
        return iterated_difference(f, w[1], n + 1, w[0])
    if report.notion == "wright":
        return mixed_difference(f, w[1:], w[0])
    if report.notion == "frechet":
        return abs(mixed_difference(f, w[1:], w[0]))
    raise UsageError(f"cannot replay notion {report.notion!r}")


def merge_reports(reports: Sequence[ConvexityReport]) -> ConvexityReport:
    """Combine reports of one notion taken over disjoint sweeps, in order."""
    if not reports:
        raise UsageError("nothing to merge")
    first = reports[0]
    maximize = first.notion == "frechet"
    worst, witness = None, ()
    for rep in reports:
        m = rep.worst_margin
        if m is None:
            continue
        if worst is None or (m > worst if maximize else m < worst):
            worst, witness = m, rep.witness
    violated = any(r.violated for r in reports)
    complete = all(r.verdict != INCONCLUSIVE for r in reports)
    verdict = VIOLATED if violated else (CERTIFIED if complete else INCONCLUSIVE)
    return ConvexityReport(
        notion=first.notion,
        order=first.order,
        verdict=verdict,
        worst_margin=worst,
        witness=witness,
        tested_count=sum(r.tested_count for r in reports),
        budget_exhausted=any(r.budget_exhausted for r in reports),
        tolerance=first.tolerance,
        sweep={"kind": "merged", "parts": [r.sweep for r in reports]},
    )


__all__ = [
    "CERTIFIED",
    "INCONCLUSIVE",
    "VIOLATED",
    "ConvexityReport",
    "DEFAULT_BUDGET",
    "certify_convex",
    "certify_frechet",
    "certify_jensen",
    "certify_rn_convex",
    "certify_wright",
    "default_tolerance",
    "merge_reports",
    "replay_witness",
    "step_multiples",
]
