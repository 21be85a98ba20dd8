"""CSV ingestion and emission.

Real samples use the header ``x,value`` (or ``x,vp,vq`` for values in
Q(sqrt 2)).  Module samples use ``p,q,vp,vq`` (value ``vp + vq sqrt 2``) or
``p,q,value`` (a float value).  Rationals are written as ``a/b`` strings and
decimal strings are read exactly.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from typing import Sequence

from .decompose import ModuleSamples
from .diffcore import GridFunction
from .errors import IngestionError, UsageError
from .scalar import EXACT, FLOAT, QUAD, QuadElem, format_scalar, parse_rational


def _rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError("empty file", line=1) from None
        header = [h.strip().lower() for h in header]
        rows = [(lineno, row) for lineno, row in enumerate(reader, start=2) if any(c.strip() for c in row)]
    return header, rows


def _parse(token: str, line: int, as_float: bool = False):
    try:
        if as_float:
            try:
                return float(token)
            except ValueError:
                return float(parse_rational(token))
        return parse_rational(token)
    except (ValueError, ZeroDivisionError):
        raise IngestionError(f"cannot parse {token!r}", line=line) from None


def ingest_real_csv(path, mode: str = EXACT) -> GridFunction:
    """Read ``x,value`` rows into a :class:`GridFunction`.

    ``mode`` decides how entries are read: ``"exact"`` keeps them as exact
    rationals, ``"float"`` as binary64, ``"quad"`` as elements of Q(sqrt 2)
    (with an ``x,vp,vq`` header the value is ``vp + vq sqrt 2``).
    """
    header, rows = _rows(path)
    if header not in (["x", "value"], ["x", "vp", "vq"]):
        raise IngestionError(f"expected header 'x,value' or 'x,vp,vq', got {','.join(header)}", line=1)
    as_float = mode == FLOAT
    if as_float and len(header) == 3:
        raise IngestionError("x,vp,vq files need exact or quad mode", line=1)
    points, values = [], []
    for lineno, row in rows:
        if len(row) != len(header):
            raise IngestionError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        x = _parse(row[0], lineno, as_float)
        if len(header) == 3:
            v = QuadElem(_parse(row[1], lineno), _parse(row[2], lineno))
        else:
            v = _parse(row[1], lineno, as_float)
            if mode == QUAD:
                v = QuadElem(v)
        if points and not x > points[-1]:
            what = "duplicate" if x == points[-1] else "unsorted"
            raise IngestionError(f"{what} x value {row[0]}", line=lineno)
        points.append(x)
        values.append(v)
    if len(points) < 2:
        raise IngestionError("need at least two data rows")
    return GridFunction(tuple(points), tuple(values))


def ingest_module_csv(path, mode: str | None = None) -> ModuleSamples:
    """Read module samples; the rational sub-grid (``q = 0``) must exist and be uniform."""
    header, rows = _rows(path)
    if header not in (["p", "q", "vp", "vq"], ["p", "q", "value"]):
        raise IngestionError(f"expected header 'p,q,vp,vq' or 'p,q,value', got {','.join(header)}", line=1)
    quad_values = len(header) == 4
    exact_scalar = mode == EXACT
    points, values, seen = [], [], {}
    for lineno, row in rows:
        if len(row) != len(header):
            raise IngestionError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        p, q = _parse(row[0], lineno), _parse(row[1], lineno)
        x = QuadElem(p, q)
        if x in seen:
            raise IngestionError(f"duplicate point ({row[0]}, {row[1]}); first seen on line {seen[x]}", line=lineno)
        seen[x] = lineno
        if quad_values:
            v = QuadElem(_parse(row[2], lineno), _parse(row[3], lineno))
        else:
            v = _parse(row[2], lineno, as_float=not exact_scalar)
        points.append(x)
        values.append(v)
    samples = ModuleSamples(tuple(points), tuple(values))
    grid = samples.rational_grid()
    if grid.mesh is None:
        raise UsageError("the rational sub-grid (q = 0) is not equally spaced")
    return samples


def write_real_csv(path, points: Sequence, values: Sequence) -> None:
    with open(path, "w", newline="") as fh:
        quad = any(isinstance(v, QuadElem) for v in values)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "vp", "vq"] if quad else ["x", "value"])
        for x, v in zip(points, values):
            if quad:
                v = v if isinstance(v, QuadElem) else QuadElem(v)
                w.writerow([format_scalar(x), str(v.p), str(v.q)])
            else:
                w.writerow([format_scalar(x), format_scalar(v)])


def write_module_csv(path, points: Sequence[QuadElem], values: Sequence) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        floats = all(isinstance(v, float) for v in values)
        w.writerow(["p", "q", "value"] if floats else ["p", "q", "vp", "vq"])
        for x, v in zip(points, values):
            if floats:
                w.writerow([str(x.p), str(x.q), repr(v)])
            else:
                v = v if isinstance(v, QuadElem) else QuadElem(Fraction(v))
                w.writerow([str(x.p), str(x.q), str(v.p), str(v.q)])


__all__ = ["ingest_module_csv", "ingest_real_csv", "write_module_csv", "write_real_csv"]
