"""Command-line interface.

Every verdict is a statement about the supplied sample and the finite sweep
set the report describes: "certified" means *certified on the sweep set*
(all on-grid points and step tuples up to the budget), never a proof for the
underlying function on a whole interval.

Exit codes: 0 certified / success, 1 violated, 2 inconclusive, 3 usage,
ingestion or domain error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .certify import (
    CERTIFIED,
    DEFAULT_BUDGET,
    VIOLATED,
    certify_convex,
    certify_frechet,
    certify_jensen,
    certify_wright,
)
from .decompose import (
    decompose,
    lipschitz_certificate,
    verify_decomposition,
)
from .diffcore import GridFunction, identity_check
from .errors import DecompositionRejected, HoconvexError, UsageError
from .families import gen_family, parse_family
from .io import ingest_module_csv, ingest_real_csv, write_real_csv
from .scalar import EXACT, FLOAT, MODES, format_scalar, parse_rational, parse_scalar

EXIT_OK, EXIT_VIOLATED, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
COMMANDS = ("certify", "identity", "lipschitz", "decompose", "gen", "verify")
NOTIONS = ("jensen", "wright", "convex", "frechet")

SWEEP_NOTE = "certified means certified on the sweep set described in 'sweep'"


@dataclass(frozen=True)
class RunConfig:
    command: str
    order: int = 1
    mode: str = EXACT
    tolerance: object = None
    budget: int = DEFAULT_BUDGET
    input: str | None = None
    output: str | None = None
    seed: int = 0
    notion: str = "jensen"
    mesh: str | None = None
    plot_csv: str | None = None
    threads: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.order < 1:
            raise UsageError("--order must be at least 1")
        if self.budget < 1:
            raise UsageError("--budget must be at least 1")
        if self.mode not in MODES:
            raise UsageError(f"--mode must be one of {', '.join(MODES)}")
        if self.tolerance is not None and self.tolerance < 0:
            raise UsageError("--tol must be nonnegative")
        if self.threads < 1:
            raise UsageError("--threads must be at least 1")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="hoconvex",
        description="Higher-order convexity certifiers and decomposition on finite samples. "
        "A 'certified' verdict means certified on the reported sweep set.",
        epilog="exit codes: 0 certified/success, 1 violated, 2 inconclusive, 3 usage error",
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, needs_input=True):
        sp.add_argument("--order", type=int, default=None, help="order n (default 1)")
        sp.add_argument("--mode", choices=MODES, default=EXACT)
        sp.add_argument("--tol", default=None, help="nonnegative tolerance (default 0 exact, scaled 1e-9 float)")
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max tuples tested per sweep")
        sp.add_argument("--input", required=needs_input, help="input CSV")
        sp.add_argument("--out", help="write the JSON report here (default stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")

    sp = sub.add_parser("certify", help="certify jensen/wright/convex/frechet on real samples")
    common(sp)
    sp.add_argument("--notion", choices=NOTIONS, default="jensen")
    sp.add_argument("--plot-csv", help="write x,margin pairs (worst margin per base point)")

    sp = sub.add_parser("identity", help="check divided difference vs iterated difference on the grid")
    common(sp)

    sp = sub.add_parser("lipschitz", help="Lipschitz certificate from anchor nodes")
    common(sp)
    sp.add_argument("--u", required=True, help="comma-separated lower anchors u_1<...<u_n")
    sp.add_argument("--u-prime", required=True, help="upper anchor")
    sp.add_argument("--a", default=None)
    sp.add_argument("--b", default=None)

    sp = sub.add_parser("decompose", help="split module samples into g + polynomial function")
    common(sp)
    sp.add_argument("--mesh", default=None, help="expected mesh of the rational sub-grid")
    sp.add_argument("--g", default=None, help="write g on the rational grid as x,value CSV")

    sp = sub.add_parser("gen", help="generate a synthetic family")
    common(sp, needs_input=False)
    sp.add_argument("--family", required=True, help="exp, abs, monomial(k), standard_poly(n), "
                    "polyfun(n), wright_synthetic(n)")
    sp.add_argument("--interval", default="0,1", help="lo,hi")
    sp.add_argument("--mesh", default=None, help="grid mesh (default 1/64, or 1/12 for module families)")

    sp = sub.add_parser("verify", help="verify a decomposition f = g + P on a uniform grid")
    common(sp)
    sp.add_argument("--g", required=True, help="x,value CSV of g at the same points")
    return p


def _config(args) -> RunConfig:
    tol = None if args.tol is None else _parse(args.tol, args.mode, "--tol")
    extra = {"param": args.order} if args.command == "gen" and args.order is not None else {}
    extra |= {k: v for k, v in vars(args).items()
             if k not in ("command", "order", "mode", "tol", "budget", "input", "out", "seed",
                          "notion", "mesh", "plot_csv", "threads") and v is not None}
    return RunConfig(
        command=args.command,
        order=1 if args.order is None else args.order,
        mode=args.mode,
        tolerance=tol,
        budget=args.budget,
        input=args.input,
        output=args.out,
        seed=args.seed,
        notion=getattr(args, "notion", "jensen"),
        mesh=getattr(args, "mesh", None),
        plot_csv=getattr(args, "plot_csv", None),
        threads=args.threads,
        extra=extra,
    )


def _parse(text, mode, flag):
    try:
        return parse_scalar(text, FLOAT if mode == FLOAT else EXACT)
    except ValueError:
        raise UsageError(f"{flag}: cannot parse {text!r}") from None


def _verdict_exit(verdict: str) -> int:
    return {CERTIFIED: EXIT_OK, VIOLATED: EXIT_VIOLATED}.get(verdict, EXIT_INCONCLUSIVE)


def _config_json(cfg: RunConfig) -> dict:
    out = asdict(cfg)
    out["tolerance"] = None if cfg.tolerance is None else format_scalar(cfg.tolerance)
    out.pop("threads")  # does not affect results
    return out


def _emit(cfg: RunConfig, payload: dict, stdout) -> None:
    text = json.dumps({"config": _config_json(cfg), **payload}, indent=2) + "\n"
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_certify(cfg: RunConfig, stdout) -> int:
    g = ingest_real_csv(cfg.input, cfg.mode)
    uniform = g.mesh is not None
    kw = {"workers": cfg.threads, "profile": cfg.plot_csv is not None}
    n, tol = cfg.order, cfg.tolerance
    if cfg.notion == "jensen":
        report = certify_jensen(g, n, tol, budget=cfg.budget, exhaustive=uniform, **kw)
    elif cfg.notion == "wright":
        report = certify_wright(g, n, tol, cfg.budget, exhaustive=uniform, **kw)
    elif cfg.notion == "frechet":
        report = certify_frechet(g, n, tol, budget=cfg.budget, exhaustive=uniform, **kw)
    else:
        report = certify_convex(g, n, tol, cfg.budget, **kw)
    if cfg.plot_csv:
        with open(cfg.plot_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "margin"])
            for x, m in (report.profile or {}).items():
                w.writerow([format_scalar(x), format_scalar(m)])
    _emit(cfg, {"note": SWEEP_NOTE, "report": report.to_json()}, stdout)
    return _verdict_exit(report.verdict)


def _cmd_identity(cfg: RunConfig, stdout) -> int:
    g = ingest_real_csv(cfg.input, cfg.mode)
    mesh = g.mesh
    if mesh is None:
        raise UsageError("identity sweep needs an equally spaced grid")
    n, size = cfg.order, len(g)
    tested, failures, first = 0, 0, None
    worst = None
    for mult in range(1, (size - 1) // (n + 1) + 1):
        h = mult * mesh
        for i in range(size - (n + 1) * mult):
            if tested >= cfg.budget:
                break
            check = identity_check(g, g.points[i], h, n)
            tested += 1
            gap = abs(check.lhs - check.rhs)
            if worst is None or gap > worst:
                worst = gap
            if not check.equal:
                failures += 1
                first = first or (g.points[i], h)
    report = {
        "n": n,
        "tested_count": tested,
        "failures": failures,
        "worst_gap": None if worst is None else format_scalar(worst),
        "first_failure": None if first is None else [format_scalar(v) for v in first],
        "sweep": {"mesh": format_scalar(mesh), "points": size, "budget": cfg.budget},
    }
    _emit(cfg, {"report": report}, stdout)
    return EXIT_VIOLATED if failures else EXIT_OK


def _cmd_lipschitz(cfg: RunConfig, stdout) -> int:
    g = ingest_real_csv(cfg.input, cfg.mode)
    e = cfg.extra
    try:
        u = [parse_rational(t) for t in e["u"].split(",")]
        u_prime = parse_rational(e["u_prime"])
        a = None if e.get("a") is None else parse_rational(e["a"])
        b = None if e.get("b") is None else parse_rational(e["b"])
    except ValueError as exc:
        raise UsageError(f"anchor: {exc}") from None
    cert = lipschitz_certificate(g, cfg.order, u, u_prime, a, b)
    _emit(cfg, {"certificate": cert.to_json()}, stdout)
    return EXIT_OK


def _cmd_decompose(cfg: RunConfig, stdout) -> int:
    samples = ingest_module_csv(cfg.input, cfg.mode)
    mesh = None if cfg.mesh is None else _parse(cfg.mesh, EXACT, "--mesh")
    try:
        result = decompose(samples, cfg.order, mesh=mesh, tol=cfg.tolerance, budget=cfg.budget,
                           workers=cfg.threads)
    except DecompositionRejected as exc:
        sys.stderr.write(f"hoconvex: {exc}\n")
        _emit(cfg, {"note": SWEEP_NOTE, "rejected": True, "wright_report": exc.report.to_json()}, stdout)
        return EXIT_VIOLATED
    if cfg.extra.get("g"):
        grid = samples.rational_grid()
        lookup = dict(result.g_values)
        write_real_csv(cfg.extra["g"], grid.points, [lookup[x] for x in samples.points if x.is_rational])
    _emit(cfg, {"note": SWEEP_NOTE, "rejected": False, "result": result.to_json()}, stdout)
    verdicts = (result.frechet_report.verdict, result.g_report.verdict)
    if VIOLATED in verdicts:
        return EXIT_VIOLATED
    return EXIT_OK if all(v == CERTIFIED for v in verdicts) else EXIT_INCONCLUSIVE


def _cmd_gen(cfg: RunConfig, stdout) -> int:
    if not cfg.output:
        raise UsageError("gen needs --out DIR")
    parse_family(cfg.extra["family"])
    lo, _, hi = cfg.extra["interval"].partition(",")
    if not hi:
        raise UsageError("--interval must be 'lo,hi'")
    try:
        manifest = gen_family(cfg.extra["family"], cfg.output, cfg.seed, (lo, hi), cfg.mesh, cfg.extra.get("param"))
    except ValueError as exc:
        if isinstance(exc, HoconvexError):
            raise
        raise UsageError(str(exc)) from None
    stdout.write(json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def _read_any(path, mode) -> GridFunction:
    with open(path, newline="") as fh:
        header = fh.readline().strip().lower()
    if header.startswith("p,q"):
        return ingest_module_csv(path, mode).rational_grid()
    return ingest_real_csv(path, mode)


def _cmd_verify(cfg: RunConfig, stdout) -> int:
    f = _read_any(cfg.input, cfg.mode)
    g = _read_any(cfg.extra["g"], cfg.mode)
    report = verify_decomposition(f, g, cfg.order, cfg.tolerance, cfg.budget)
    _emit(cfg, {"note": SWEEP_NOTE, "report": report.to_json()}, stdout)
    return EXIT_OK if report.passed else EXIT_VIOLATED


_COMMANDS = {
    "certify": _cmd_certify,
    "identity": _cmd_identity,
    "lipschitz": _cmd_lipschitz,
    "decompose": _cmd_decompose,
    "gen": _cmd_gen,
    "verify": _cmd_verify,
}


def run(cfg: RunConfig, stdout=None) -> int:
    return _COMMANDS[cfg.command](cfg, stdout or sys.stdout)


def main(argv=None, stdout=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return run(_config(args), stdout)
    except (HoconvexError, OSError, ValueError, TypeError) as exc:
        sys.stderr.write(f"hoconvex: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
