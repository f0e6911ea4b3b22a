"""Command-line front end.

Every subcommand takes the same option set. Without ``--out`` the primary
payload is printed to stdout; with ``--out`` files are written and nothing
but diagnostics reaches the terminal.

Exit codes: 0 success, 1 reproduction failure, 2 numeric failure,
64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, reproduce
from .abel import (
    check_integrability,
    abel_coefficients,
    family_invariant,
    majorana_consistency,
    majorana_rhs,
    tau_uniform_samples,
)
from .bvp import X_MAX, ratio_state, solve_bvp
from .errors import BracketError, LampTFError, ParameterError, StepUnderflowError
from .export import (
    FIXED_POINT_HEADER,
    csv_text,
    fixed_point_rows,
    json_text,
    trajectory_rows,
    write_text,
)
from .family import oscillator_coefficients, particular_solution, perturbation_expansion
from .phase import TF_WINDOW, AutonomousSystem, analyze, portrait
from .svg import render_portrait

logger = logging.getLogger("lamptf")

EXIT_OK, EXIT_REPRODUCE, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 64
COMMANDS = ("solve", "perturb", "abel", "majorana", "phase", "classify", "reproduce")
# commands defined only for p > 0
POSITIVE_P = {"solve", "perturb", "abel", "majorana"}
MAJORANA_RANGE = (0.5, 20.0, 201)
GENERATOR = f"lamptf {__version__}"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _real(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("NaN is not allowed")
    return v


def _override(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return name, _real(value)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_real, help="family parameter (1 is Thomas-Fermi; 'inf' allowed where defined)")
    common.add_argument("--format", choices=("csv", "json", "svg"), help="output format (svg: phase only)")
    common.add_argument("--out", type=Path, help="output path; stdout when omitted")
    common.add_argument("--rtol", type=_real, default=1e-10, help="integrator relative tolerance")
    common.add_argument("--atol", type=_real, default=1e-14, help="integrator absolute tolerance")
    common.add_argument("--slope-tol", type=_real, default=1e-9, help="bracket width for the critical slope")
    common.add_argument("--x-max", type=_real, default=X_MAX, help="shooting horizon")
    common.add_argument(
        "--window", type=_real, nargs=4, metavar=("X0", "X1", "Y0", "Y1"), help="phase-plane bounds"
    )
    common.add_argument("--json", action="store_true", help="machine-readable report (reproduce)")
    common.add_argument(
        "--lambda-map", choices=("consistent", "2n-1"), default="consistent",
        help="consistent: lam = 2; 2n-1: lam = 3 - 2/(p+1) (phase, classify)",
    )
    common.add_argument(
        "--inject", type=_override, action="append", default=[], metavar="NAME=VALUE",
        help="override an intermediate value in reproduce (negative control)",
    )
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="lamptf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=GENERATOR)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "solve": "critical slope and decaying solution by shooting",
        "perturb": "particular solution, oscillator and perturbation coefficients",
        "abel": "Abel invariant and integrability verdict",
        "majorana": "consistency of the Majorana reduction along the solved curve",
        "phase": "phase portrait (SVG) with fixed-point and trajectory CSV",
        "classify": "fixed points of the autonomous system",
        "reproduce": "run the reproduction suite",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _check(args) -> None:
    cmd = args.command
    if cmd != "reproduce":
        if args.p is None:
            raise UsageError("--p is required")
        if cmd in POSITIVE_P and not args.p > 0:
            raise UsageError(f"{cmd} needs p > 0, got {args.p:g}")
    if args.format == "svg" and cmd != "phase":
        raise UsageError("--format svg is only valid for phase")
    if args.slope_tol < 1e-12:
        raise UsageError("--slope-tol must be at least 1e-12")
    if not (args.rtol > 0 and args.atol >= 0):
        raise UsageError("tolerances must be positive")
    if not args.x_max > 0:
        raise UsageError("--x-max must be positive")
    if args.window is not None:
        x0, x1, y0, y1 = args.window
        if not (x1 > x0 and y1 > y0) or not all(math.isfinite(v) for v in args.window):
            raise UsageError(f"degenerate window {args.window}")
    if args.inject and cmd != "reproduce":
        raise UsageError("--inject is only valid for reproduce")


def _p(value: float):
    """Integral p is passed as int so exact rational arithmetic applies."""
    if math.isfinite(value) and value == int(value):
        return int(value)
    return value


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_text(out, text)


# ---- commands -------------------------------------------------------------


def cmd_solve(args) -> int:
    p = _p(args.p)
    try:
        sol = solve_bvp(p, slope_tol=args.slope_tol, x_max=args.x_max, rtol=args.rtol, atol=args.atol)
    except (BracketError, StepUnderflowError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc), "p": args.p}
        sys.stdout.write(json_text(diag))
        return EXIT_NUMERIC
    summary = {
        "p": args.p,
        "slope": sol.slope,
        "bracket": list(sol.bracket),
        "ratio_tail": sol.ratio_tail,
        "resolution_limited": sol.resolution_limited,
        "generator": GENERATOR,
    }
    curve = csv_text(("x", "y", "dy"), zip(sol.x, sol.y, sol.dy))
    if args.out is None:
        _emit(curve if args.format == "csv" else json_text(summary), None)
    else:
        stem = args.out.with_suffix("")
        write_text(stem.with_suffix(".csv"), curve)
        write_text(stem.with_suffix(".json"), json_text(summary))
    return EXIT_OK


def cmd_perturb(args) -> int:
    p = _p(args.p)
    y0 = particular_solution(p)
    osc = oscillator_coefficients(p)
    pe = perturbation_expansion(p)
    data = {
        "p": args.p,
        "k_p": y0.k_p,
        "decay_exponent": y0.exponent,
        "zeta": osc.zeta,
        "kappa": osc.kappa,
        "r1": osc.r1,
        "r2": osc.r2,
        "c_lin": pe.c_lin,
        "exponents": list(pe.exponents),
        "c_quad": pe.c_quad,
        "pow_quad": pe.pow_quad,
        "c_cub": pe.c_cub,
        "pow_cub": pe.pow_cub,
    }
    if args.format == "csv":
        rows = []
        for k, v in data.items():
            if isinstance(v, list):
                rows += [(f"{k}[{i}]", x) for i, x in enumerate(v)]
            else:
                rows.append((k, v))
        _emit(csv_text(("name", "value"), rows), args.out)
    else:
        _emit(json_text(data), args.out)
    return EXIT_OK


def cmd_abel(args) -> int:
    p = _p(args.p)
    form = abel_coefficients(p)
    inv = family_invariant(p)
    rep = check_integrability(p)
    if args.format == "csv":
        _emit(csv_text(("w", "alpha"), rep.samples), args.out)
        return EXIT_OK
    data = {
        "p": args.p,
        "f2": form.f2,
        "f3_amp": form.f3_amp,
        "f3_pow": form.f3_pow,
        "invariant": {"A_p": inv.A_p, "B_p": inv.B_p, "pow": inv.pow},
        "alpha_samples": [list(s) for s in rep.samples],
        "alpha_spread": rep.alpha_spread,
        "excluded": rep.excluded,
        "region_spreads": rep.region_spreads,
        "tol": rep.tol,
        "verdict": rep.verdict,
    }
    _emit(json_text(data), args.out)
    return EXIT_OK


def cmd_majorana(args) -> int:
    p = _p(args.p)
    try:
        sol = solve_bvp(p, slope_tol=args.slope_tol, x_max=args.x_max, rtol=args.rtol, atol=args.atol)
    except (BracketError, StepUnderflowError) as exc:
        sys.stdout.write(json_text({"error": type(exc).__name__, "message": str(exc), "p": args.p}))
        return EXIT_NUMERIC
    x_lo, x_hi, n = MAJORANA_RANGE
    x_hi = min(x_hi, float(sol.x[-1]))
    w, s = tau_uniform_samples(p, lambda x: ratio_state(sol, x), x_lo, x_hi, n)
    e = 1 / ((p + 1) * (p + 2))
    tau = w**e
    u = tau ** (-p * (p + 1)) * (1 - s / ((1 + 2 / p) * w))
    if args.format == "csv":
        _emit(csv_text(("tau", "u", "w", "s"), zip(tau, u, w, s)), args.out)
        return EXIT_OK
    data = {
        "p": args.p,
        "x_range": [x_lo, x_hi],
        "samples": n,
        "residual": majorana_consistency(p, w, s),
        "rhs_tau0": majorana_rhs(p, 0.0, 0.0),
    }
    _emit(json_text(data), args.out)
    return EXIT_OK


def _system(args) -> AutonomousSystem:
    return AutonomousSystem.from_p(_p(args.p), args.lambda_map)


def _fixed_point_json(args, sys_, fps) -> dict:
    return {
        "p": args.p,
        "n": sys_.n,
        "lam": sys_.lam,
        "lambda_map": args.lambda_map,
        "fixed_points": [
            {
                "X": fp.coords[0],
                "Y": fp.coords[1],
                "trace": fp.trace,
                "det": fp.det,
                "discriminant": fp.discriminant,
                "kind": fp.kind,
                "eigenvalues": list(fp.eigenvalues),
                "eigenvectors": [list(v) for v in fp.eigenvectors] if fp.eigenvectors else None,
                "note": fp.note,
            }
            for fp in fps
        ],
    }


def cmd_classify(args) -> int:
    sys_ = _system(args)
    fps = analyze(sys_)
    if args.format == "json":
        _emit(json_text(_fixed_point_json(args, sys_, fps)), args.out)
    else:
        _emit(csv_text(FIXED_POINT_HEADER, fixed_point_rows(fps)), args.out)
    return EXIT_OK


def cmd_phase(args) -> int:
    sys_ = _system(args)
    window = tuple(args.window) if args.window else TF_WINDOW
    pp = portrait(sys_, window=window)
    table = csv_text(FIXED_POINT_HEADER, fixed_point_rows(pp.fixed_points))
    fmt = args.format or ("svg" if args.out is not None and args.out.suffix == ".svg" else "csv")
    if args.out is None:
        if fmt == "svg":
            _emit(render_portrait(pp, GENERATOR), None)
        elif fmt == "json":
            _emit(json_text(_fixed_point_json(args, sys_, pp.fixed_points)), None)
        else:
            _emit(table, None)
        return EXIT_OK
    stem = args.out.with_suffix("")
    traj = csv_text(("index", "seed", "direction", "t", "X", "Y"), trajectory_rows(pp))
    if fmt == "svg":
        write_text(args.out, render_portrait(pp, GENERATOR))
        write_text(stem.with_suffix(".csv"), table)
    elif fmt == "json":
        write_text(args.out, json_text(_fixed_point_json(args, sys_, pp.fixed_points)))
    else:
        write_text(args.out, table)
    write_text(Path(f"{stem}_trajectories.csv"), traj)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    overrides = dict(args.inject)
    results = reproduce.run(overrides)
    if args.json:
        _emit(json_text(reproduce.report(results, overrides)), args.out)
    else:
        text = "\n".join(reproduce.summary_lines(results)) + "\n"
        _emit(text, args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_REPRODUCE


_HANDLERS = {
    "solve": cmd_solve,
    "perturb": cmd_perturb,
    "abel": cmd_abel,
    "majorana": cmd_majorana,
    "phase": cmd_phase,
    "classify": cmd_classify,
    "reproduce": cmd_reproduce,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        _check(args)
        return _HANDLERS[args.command](args)
    except (UsageError, ParameterError) as exc:
        parser.print_usage(sys.stderr)
        print(f"lamptf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StepUnderflowError, BracketError, LampTFError, ArithmeticError) as exc:
        print(f"lamptf: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
