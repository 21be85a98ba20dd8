"""Synthetic test families with known ground truth.

``wright_synthetic(n)`` builds the Wright-convex inputs a decomposition is
meant for: a continuous n-convex spline plus a (usually non-continuous)
polynomial function of degree at most n, sampled on the module Q + Q sqrt 2.
The spline's knots sit on block boundaries of the rational grid, so the
degree-n block extension reproduces it exactly and the residual can be
checked without any tolerance.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .errors import UsageError
from .io import write_module_csv, write_real_csv
from .polyfun import PolyFunction, eval_standard, random_polyfun
from .scalar import QuadElem, parse_rational, sign

FAMILIES = ("exp", "abs", "monomial", "standard_poly", "polyfun", "wright_synthetic")


@dataclass(frozen=True)
class TruncatedPowerSpline:
    """``sum_i w_i (x - t_i)_+^n + sum_j b_j x^j`` with ``w_i >= 0`` and ``deg <= n``.

    Its n-th derivative is a nondecreasing step function, so it is n-convex.
    Exact at rational and quad arguments.
    """

    n: int
    knots: tuple
    weights: tuple
    poly: tuple = ()

    def __post_init__(self):
        if any(w < 0 for w in self.weights):
            raise UsageError("spline weights must be nonnegative")
        if len(self.poly) > self.n + 1:
            raise UsageError("polynomial part must have degree at most n")

    def __call__(self, x):
        total = eval_standard(self.poly, x) if self.poly else 0
        for t, w in zip(self.knots, self.weights):
            d = x - t
            if sign(d) > 0:
                total = total + w * d**self.n
        return total

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "knots": [str(t) for t in self.knots],
            "weights": [str(w) for w in self.weights],
            "poly": [str(c) for c in self.poly],
        }

    @classmethod
    def from_json(cls, data: dict) -> TruncatedPowerSpline:
        return cls(
            int(data["n"]),
            tuple(parse_rational(t) for t in data["knots"]),
            tuple(parse_rational(w) for w in data["weights"]),
            tuple(parse_rational(c) for c in data["poly"]),
        )


def random_spline(n: int, grid: Sequence, rng: random.Random, block: int | None = None,
                  n_knots: int = 3) -> TruncatedPowerSpline:
    """n-convex spline with knots on every ``block``-th interior grid point."""
    block = block or n
    candidates = list(grid[block:-1:block])
    knots = sorted(rng.sample(candidates, min(n_knots, len(candidates)))) if candidates else []
    weights = tuple(Fraction(rng.randint(1, 6), rng.randint(1, 3)) for _ in knots)
    poly = tuple(Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n + 1))
    return TruncatedPowerSpline(n, tuple(knots), weights, poly)


def rational_grid(lo, hi, mesh) -> list[Fraction]:
    lo, hi, mesh = Fraction(lo), Fraction(hi), Fraction(mesh)
    count = (hi - lo) / mesh
    if count.denominator != 1 or count < 1:
        raise UsageError(f"mesh {mesh} does not divide [{lo}, {hi}]")
    return [lo + i * mesh for i in range(int(count) + 1)]


def module_points(grid: Sequence, qs: Sequence, per_line: int | None = None) -> list[QuadElem]:
    """Rational grid plus, for each ``q``, grid shifts ``p + q sqrt 2`` inside the hull."""
    lo, hi = grid[0], grid[-1]
    points = [QuadElem(p) for p in grid]
    for q in qs:
        line = [QuadElem(p, q) for p in grid]
        line = [x for x in line if lo <= x <= hi]
        if per_line is not None:
            line = line[:per_line]
        points.extend(line)
    return points


def parse_family(spec: str) -> tuple[str, int | None]:
    """``"monomial(3)"`` or ``"monomial:3"`` -> ``("monomial", 3)``."""
    m = re.fullmatch(r"\s*([a-z_]+)\s*(?:[(:]\s*(\d+)\s*\)?)?\s*", spec)
    if not m or m[1] not in FAMILIES:
        raise UsageError(f"unknown family {spec!r}; choose from {', '.join(FAMILIES)}")
    return m[1], int(m[2]) if m[2] is not None else None


def wright_synthetic(n: int, seed: int, lo=0, hi=1, mesh=Fraction(1, 12),
                     qs=(Fraction(1, 5), Fraction(-1, 7)), per_line: int | None = 6):
    """Return ``(points, values, spline, P)`` for one Wright-convex instance."""
    rng = random.Random(seed)
    grid = rational_grid(lo, hi, mesh)
    if (len(grid) - 1) % n:
        raise UsageError(f"grid of {len(grid)} points cannot be split into blocks of {n} cells")
    spline = random_spline(n, grid, rng)
    P = random_polyfun(n, rng.randrange(2**32), standard_fraction=0.0)
    points = module_points(grid, qs, per_line)
    values = [spline(x) + P(x) for x in points]
    return points, values, spline, P


def gen_family(family: str, out_dir, seed: int = 0, interval=(0, 1), mesh=None,
               param: int | None = None) -> dict:
    """Write ``<family>.csv`` and ``manifest.json`` into ``out_dir``; return the manifest.

    ``mesh`` defaults to 1/64 for real-line families and 1/12 for module
    families, which keeps exhaustive sweeps of the module samples in budget.
    """
    name, inline = parse_family(family)
    if mesh is None:
        mesh = "1/12" if name in ("polyfun", "wright_synthetic") else "1/64"
    param = inline if inline is not None else param
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lo, hi = (parse_rational(str(v)) for v in interval)
    mesh = parse_rational(str(mesh))
    rng = random.Random(seed)
    manifest: dict = {
        "family": name,
        "param": param,
        "seed": seed,
        "interval": [str(lo), str(hi)],
        "mesh": str(mesh),
    }
    csv_path = out / f"{name}.csv"

    if name in ("exp", "abs", "monomial", "standard_poly"):
        grid = rational_grid(lo, hi, mesh)
        if name == "exp":
            values = [math.exp(x) for x in grid]
            truth = {"function": "exp"}
        elif name == "abs":
            center = (lo + hi) / 2
            values = [abs(x - center) for x in grid]
            truth = {"function": "abs", "center": str(center)}
        elif name == "monomial":
            k = 2 if param is None else param
            values = [x**k for x in grid]
            truth = {"function": "monomial", "power": k}
        else:
            deg = 2 if param is None else param
            coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(deg + 1)]
            values = [eval_standard(coeffs, x) for x in grid]
            truth = {"function": "standard_poly", "coefficients": [str(c) for c in coeffs]}
        write_real_csv(csv_path, grid, values)
        manifest.update(format="real", rows=len(grid), ground_truth=truth)
    elif name == "polyfun":
        deg = 1 if param is None else param
        P = random_polyfun(deg, seed, standard_fraction=0.0)
        grid = rational_grid(lo, hi, mesh)
        points = module_points(grid, (Fraction(1, 5), Fraction(-1, 7)))
        write_module_csv(csv_path, points, [P(x) for x in points])
        manifest.update(format="module", rows=len(points), ground_truth={"polyfun": P.to_json()})
    else:
        deg = 1 if param is None else param
        points, values, spline, P = wright_synthetic(deg, seed, lo, hi, mesh)
        write_module_csv(csv_path, points, values)
        manifest.update(
            format="module",
            rows=len(points),
            order=deg,
            ground_truth={"continuous": spline.to_json(), "polyfun": P.to_json()},
        )
    manifest["csv"] = csv_path.name
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def function_from_manifest(manifest: dict):
    """Rebuild the generating function recorded in a manifest."""
    truth = manifest["ground_truth"]
    if "polyfun" in truth:
        P = PolyFunction.from_json(truth["polyfun"])
        if "continuous" in truth:
            spline = TruncatedPowerSpline.from_json(truth["continuous"])
            return lambda x: spline(x) + P(x)
        return P
    kind = truth["function"]
    if kind == "exp":
        return lambda x: math.exp(x)
    if kind == "abs":
        center = parse_rational(truth["center"])
        return lambda x: abs(x - center)
    if kind == "monomial":
        return lambda x: x ** truth["power"]
    coeffs = [parse_rational(c) for c in truth["coefficients"]]
    return lambda x: eval_standard(coeffs, x)


__all__ = [
    "FAMILIES",
    "TruncatedPowerSpline",
    "function_from_manifest",
    "gen_family",
    "module_points",
    "parse_family",
    "random_spline",
    "rational_grid",
    "wright_synthetic",
]
