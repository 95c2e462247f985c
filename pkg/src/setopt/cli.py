"""Command-line interface: ``setopt solve|batch|check|minelems``.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .cone import make_orthant, validate
from .errors import ConeError, DimensionMismatch, SetOptError, UnknownInstance
from .finite_sets import minimal_naive, minimal_presort
from .instances import fd_check, load
from .solver import SolveParams, solve, write_trace

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise UsageError(f"could not parse {text!r} as comma-separated floats") from None


def _cone_arg(text: str | None, m: int):
    if text is None:
        return None
    if text.startswith("orthant"):
        _, _, dim = text.partition(":")
        dim = int(dim) if dim else m
        if dim != m:
            raise UsageError(f"cone dimension {dim} does not match m = {m}")
        return make_orthant(dim)
    with open(text) as fh:
        data = json.load(fh)
    cone = validate(data["dual_rows"], data["e"])
    if cone.m != m:
        raise UsageError(f"cone dimension {cone.m} does not match m = {m}")
    return cone


def _params(args) -> SolveParams:
    return SolveParams(beta=args.beta, nu=args.nu, tol_stat=args.tol, max_iters=args.max_iters)


def _add_solver_flags(p):
    p.add_argument("--beta", type=float, default=1e-4, help="Armijo sufficient-decrease constant")
    p.add_argument("--nu", type=float, default=0.5, help="step reduction factor")
    p.add_argument("--tol", type=float, default=1e-4, help="stop once |u| < tol")
    p.add_argument("--max-iters", type=int, default=200)


def cmd_solve(args) -> int:
    inst = load(args.instance)
    cone = _cone_arg(args.cone, inst.m) or inst.default_cone()
    x0 = _floats(args.x0)
    if x0.shape[0] != inst.n:
        raise UsageError(f"--x0 needs {inst.n} values, got {x0.shape[0]}")
    trace = solve(inst, cone, x0, _params(args))
    if args.trace:
        write_trace(trace, args.trace)
    if args.plot:
        harness.export_trajectory_plot(trace, inst, args.plot)
    print(json.dumps({
        "instance": inst.name,
        "status": trace.status.value,
        "iterations": trace.iterations,
        "final_error": trace.final_error,
        "x_final": trace.x_final.tolist(),
        "partition_size": trace.final.partition_size,
    }))
    return EXIT_OK if trace.status.value in ("StrongStationaryDeclared", "MaxIterations") else EXIT_NUMERIC


def cmd_batch(args) -> int:
    inst = load(args.instance)
    cone = _cone_arg(args.cone, inst.m) or inst.default_cone()
    stats = harness.run_batch(inst, cone, runs=args.runs, seed=args.seed, params=_params(args),
                              keep_traces=bool(args.plots))
    if args.out:
        fmt = "json" if str(args.out).endswith(".json") else "csv"
        harness.export_stats(stats, args.out, fmt, include_timing=args.timing)
    if args.plots:
        out = Path(args.plots)
        out.mkdir(parents=True, exist_ok=True)
        if inst.n == 2:
            harness.export_solutions_plot(stats, inst, out / f"{inst.name}_solutions.svg")
        if inst.m == 2:
            solved = [t for t in stats.traces if t.solved]
            if solved:
                pick = max(solved, key=lambda t: t.iterations)
                harness.export_trajectory_plot(pick, inst, out / f"{inst.name}_trajectory.svg")
    summary = harness.stats_summary(stats, include_timing=True)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_check(args) -> int:
    inst = load(args.instance)
    cone = _cone_arg(args.cone, inst.m) or inst.default_cone()
    gen = np.random.Generator(np.random.Philox(key=[args.seed, 0]))
    box = inst.sampling_box
    errors = [fd_check(inst, box[:, 0] + (box[:, 1] - box[:, 0]) * gen.random(inst.n))
              for _ in range(args.points)]
    worst = max(errors)
    ok = worst <= args.fd_tol
    print(json.dumps({"instance": inst.name, "cone": repr(cone), "fd_max_error": worst, "ok": ok}))
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_minelems(args) -> int:
    pts = np.loadtxt(args.points, delimiter=",", ndmin=2)
    cone = _cone_arg(args.cone or f"orthant:{pts.shape[1]}", pts.shape[1])
    idx = minimal_naive(pts, cone) if args.naive else np.sort(minimal_presort(pts, cone))
    print(json.dumps({"indices": idx.tolist(), "points": pts[idx].tolist()}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="setopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run the descent method from one starting point")
    p.add_argument("--instance", required=True, help="built-in name or JSON descriptor")
    p.add_argument("--x0", required=True, help="comma-separated starting point")
    p.add_argument("--cone", help="orthant[:m] or JSON file with dual_rows and e")
    p.add_argument("--trace", help="write the iteration trace as JSON lines")
    p.add_argument("--plot", help="write an image-space SVG (m = 2 only)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("batch", help="solve from seeded random starting points")
    p.add_argument("--instance", required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cone")
    p.add_argument("--out", help="statistics file (.csv or .json)")
    p.add_argument("--plots", help="directory for SVG figures")
    p.add_argument("--timing", action="store_true", help="include CPU times in --out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("check", help="validate Jacobians by finite differences")
    p.add_argument("--instance", required=True)
    p.add_argument("--cone")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fd-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("minelems", help="minimal elements of a CSV point set")
    p.add_argument("--points", required=True, help="CSV file, one point per row")
    p.add_argument("--cone", help="orthant[:m] or JSON file")
    p.add_argument("--naive", action="store_true", help="use the pairwise oracle")
    p.set_defaults(func=cmd_minelems)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, UnknownInstance, DimensionMismatch, ConeError, FileNotFoundError,
            ValueError) as exc:
        print(f"setopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SetOptError, ArithmeticError) as exc:
        print(f"setopt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
