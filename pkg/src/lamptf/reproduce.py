"""Reproduction suite: one numbered check per acceptance criterion.

Each check returns a ``CheckResult`` carrying what was measured, what it
was compared against and at which tolerance. ``overrides`` lets a caller
substitute a named intermediate value (currently ``k_p``) to confirm
that the corresponding check notices.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import __version__
from .abel import (
    Verdict,
    abel_coefficients,
    check_integrability,
    cleared_condition,
    family_invariant,
    majorana_consistency,
    majorana_rhs,
    scale_invariant_equation,
    tau_uniform_samples,
)
from .bvp import ShotKind, certify_bracket, ratio_state, solve_bvp
from .export import fixed_point_rows
from .family import (
    oscillator_coefficients,
    particular_solution,
    perturbation_expansion,
)
from .integrate import IVProblem, dense_derivative, integrate_ivp
from .oracle import rk4_critical_slope
from .phase import (
    AutonomousSystem,
    Kind,
    analyze,
    eigen_perturbation_link,
    portrait,
    saddle_flow_directions,
    saddle_recovers_y0,
    scaled,
)

__all__ = ["CheckResult", "CHECKS", "run", "summary_lines", "report"]

# shooting settings for the BVP property check: tight enough that the
# returned curve follows the decaying solution out to x = 50
BVP_SETTINGS = dict(slope_tol=1e-12, rtol=1e-12, atol=1e-16)
MAJORANA_RANGE = (0.5, 20.0, 201)


@dataclass
class CheckResult:
    item: int
    title: str
    passed: bool
    measured: dict
    expected: dict
    tolerance: dict
    runtime_s: float = 0.0
    runtime_limit_s: Optional[float] = None
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.item:2d} {self.title} ({self.runtime_s * 1e3:.1f} ms)"
        return text + (f": {self.detail}" if self.detail else "")


@dataclass
class _Ctx:
    overrides: dict = field(default_factory=dict)

    def value(self, name, computed):
        return self.overrides.get(name, computed)


def _timed(fn, repeat=1):
    best, out = math.inf, None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return out, best


def _family_constants(ctx):
    def compute():
        return particular_solution(1), oscillator_coefficients(1), oscillator_coefficients(math.inf)

    (y0, osc1, osc_inf), dt = _timed(compute, repeat=5)
    k1 = ctx.value("k_p", y0.k_p)
    zeta1, zeta_inf = -7 * math.sqrt(3) / 12, -3 * math.sqrt(2) / 4
    exact = k1 == 144 and osc1.r1 == 4 and osc1.r2 == 3 and osc1.kappa == 12 and osc_inf.kappa == 2
    dz = max(abs(osc1.zeta - zeta1), abs(osc_inf.zeta - zeta_inf))
    return (
        exact and dz <= 1e-14 and dt < 1e-3,
        dict(k1=k1, r1=osc1.r1, r2=osc1.r2, kappa1=osc1.kappa, kappa_inf=osc_inf.kappa,
             zeta1=osc1.zeta, zeta_inf=osc_inf.zeta),
        dict(k1=144, r1=4, r2=3, kappa1=12, kappa_inf=2, zeta1=zeta1, zeta_inf=zeta_inf),
        dict(exact="digit-exact", zeta=1e-14),
        dt,
        1e-3,
        f"k1={k1:g}, max zeta deviation {dz:.2e}",
    )


def _perturbation_exponents(ctx):
    (lo, hi), dt = _timed(lambda: perturbation_expansion(1).exponents)
    want = ((1 - math.sqrt(73)) / 2, (1 + math.sqrt(73)) / 2)
    dev = max(abs(lo - want[0]), abs(hi - want[1]))
    printed = (f"{lo:.3f}", f"{hi:.3f}")
    return (
        dev <= 1e-12 and printed == ("-3.772", "4.772"),
        dict(exponents=[lo, hi], printed=list(printed)),
        dict(exponents=list(want), printed=["-3.772", "4.772"]),
        dict(closed_form=1e-12, printed="3 decimals"),
        dt,
        None,
        f"deviation {dev:.1e}",
    )


def _abel_invariant(ctx):
    w = np.linspace(0.0, 1.0, 50)

    def compute():
        combo = abel_coefficients(1).equation().invariant(w)
        return combo, family_invariant(1)(w)

    (combo, closed), dt = _timed(compute)
    ref = 70 / 27 - 42 * np.sqrt(w)
    dev = float(max(np.max(np.abs(combo - ref)), np.max(np.abs(closed - ref))))
    return (
        dev < 1e-13,
        dict(max_deviation=dev),
        dict(form="70/27 - 42 sqrt(w)"),
        dict(max_abs=1e-13),
        dt,
        None,
        f"max |deviation| {dev:.1e} on 50 points",
    )


def _non_integrability(ctx):
    def compute():
        reports = {p: check_integrability(p) for p in (1, 0.5, 2, 5)}
        control = check_integrability(equation=scale_invariant_equation(2.0, 0.5))
        return reports, control

    (reports, control), dt = _timed(compute, repeat=3)
    spread1 = reports[1].alpha_spread
    verdicts = {p: r.verdict.value for p, r in reports.items()}
    ok = (
        spread1 > 0.1
        and all(r.verdict is Verdict.NON_INTEGRABLE for r in reports.values())
        and control.alpha_spread < 1e-10
        and dt < 1e-2
    )
    return (
        ok,
        dict(spread_p1=spread1, verdicts=verdicts, control_spread=control.alpha_spread),
        dict(verdict="NonIntegrable"),
        dict(spread_p1_min=0.1, control_spread_max=1e-10),
        dt,
        1e-2,
        f"spread(p=1) {spread1:.3g}, control spread {control.alpha_spread:.1e}",
    )


def _cleared_constants(ctx):
    cc, dt = _timed(lambda: cleared_condition(1))
    got = sorted([cc.c1, cc.c2, cc.c6])
    want = [Fraction(195), Fraction(3807), Fraction(11664)]
    ok = got == want and cc.radicand == 14
    return (
        ok,
        dict(c1=cc.c1, c2=cc.c2, c6=cc.c6, radicand=cc.radicand),
        dict(constants=[195, 3807, 11664], radicand=14),
        dict(exact="rational"),
        dt,
        None,
        f"constants {[str(c) for c in got]}, factor {cc.radicand}^(2/3)",
    )


_TABLE1 = [
    ((0, 0), (2, -3, 16)),
    ((-1, 0), (Fraction(5, 2), Fraction(3, 2), Fraction(1, 4))),
    ((0, 3), (-1, -6, 25)),
    ((-4, -3), (7, -6, 73)),
]


def _table1(ctx):
    fps, dt = _timed(lambda: analyze(AutonomousSystem.from_p(1)))
    rows = [(fp.coords, (fp.trace, fp.det, fp.discriminant)) for fp in fps]
    exact = [(tuple(c), tuple(v)) for c, v in rows] == [(c, v) for c, v in _TABLE1]
    saddles = all(fp.kind is Kind.SADDLE for fp in fps if fp.det < 0)
    return (
        exact and saddles,
        dict(rows=[[*c, *v, fp.kind] for (c, v), fp in zip(rows, fps)]),
        dict(rows=[[*c, *v] for c, v in _TABLE1]),
        dict(exact="rational"),
        dt,
        None,
        "" if exact else "fixed-point table differs",
    )


def _saddle_eigen(ctx):
    fp = analyze(AutonomousSystem.from_p(1))[3]
    theta = fp.eigenvalues
    want = ((7 + math.sqrt(73)) / 2, (7 - math.sqrt(73)) / 2)
    dev = max(abs(theta[0] - want[0]), abs(theta[1] - want[1]))
    v1, v2 = saddle_flow_directions(fp)
    d1, d2 = scaled(v1, 0), scaled(v2, 1)
    ref1, ref2 = (1.0, -0.943), (6.171, 1.0)
    dir_dev = [max(abs(a - b) for a, b in zip(d, r)) for d, r in ((d1, ref1), (d2, ref2))]
    return (
        dev <= 1e-12 and max(dir_dev) <= 5e-4,
        dict(eigenvalues=list(theta), direction1=list(d1), direction2=list(d2)),
        dict(eigenvalues=list(want), direction1=list(ref1), direction2=list(ref2)),
        dict(eigenvalues=1e-12, directions=5e-4),
        0.0,
        None,
        f"direction deviations {dir_dev[0]:.1e}, {dir_dev[1]:.3g}",
    )


def _eigen_link(ctx):
    links = {p: eigen_perturbation_link(p) for p in (1, 2, 5)}
    dev = max(link.deviation for link in links.values())
    return (
        dev <= 1e-12,
        dict(deviation=dev, theta={p: list(link.theta) for p, link in links.items()}),
        dict(relation="theta = (1 + 2/p) + perturbation exponent"),
        dict(abs=1e-12),
        0.0,
        None,
        f"max deviation {dev:.1e}",
    )


def _saddle_recovery(ctx):
    rec = saddle_recovers_y0(1)
    y0 = particular_solution(1)
    k = ctx.value("k_p", y0.k_p)
    ok = rec.product == 12 and rec.amplitude == k and rec.exponent == y0.exponent
    return (
        ok,
        dict(product=rec.product, amplitude=rec.amplitude, exponent=rec.exponent),
        dict(product=12, amplitude=k, exponent=y0.exponent),
        dict(exact="rational"),
        0.0,
        None,
        "",
    )


def _bvp_properties(ctx):
    def compute():
        sols = {p: solve_bvp(p, **BVP_SETTINGS) for p in (1, 2)}
        tol = {k: BVP_SETTINGS[k] for k in ("rtol", "atol")}
        kinds = {p: certify_bracket(p, s.bracket, **tol) for p, s in sols.items()}
        oracle = rk4_critical_slope()
        return sols, kinds, oracle

    (sols, kinds, oracle), dt = _timed(compute)
    sol = sols[1]
    certified = all(k == (ShotKind.UNDERSHOOT, ShotKind.OVERSHOOT) for k in kinds.values())
    slope_dev = abs(sol.slope - oracle)

    c = sol.curve
    mid = 0.5 * (c.t[1:] + c.t[:-1])
    ypp = dense_derivative(c, mid)[:, 1]
    y = c(mid)[:, 0]
    residual = float(np.max(np.abs(ypp - mid**-0.5 * y**1.5)))

    (w10, w50), _ = ratio_state(sol, np.array([10.0, 50.0]))
    ratio_ok = abs(w50 - 1) <= 0.05 and abs(w50 - 1) < abs(w10 - 1)
    ok = certified and slope_dev <= 1e-5 and residual < 1e-6 and ratio_ok and dt < 30
    return (
        ok,
        dict(
            bracket_kinds={p: [k.value for k in ks] for p, ks in kinds.items()},
            slope=sol.slope,
            oracle_slope=oracle,
            residual=residual,
            ratio_x10=float(w10),
            ratio_x50=float(w50),
        ),
        dict(bracket_kinds=["Undershoot", "Overshoot"], ratio_x50=1.0),
        dict(slope=1e-5, residual=1e-6, ratio_x50=0.05),
        dt,
        30.0,
        (
            f"bracket certified={certified}, |slope - oracle|={slope_dev:.1e}, "
            f"residual={residual:.1e}, y/y0 at x=10: {w10:.4f}, at x=50: {w50:.4f}"
        ),
    )


def _majorana(ctx):
    def compute():
        sol = solve_bvp(1)
        x_lo, x_hi, n = MAJORANA_RANGE
        w, s = tau_uniform_samples(1, lambda x: ratio_state(sol, x), x_lo, x_hi, n)
        return majorana_consistency(1, w, s)

    residual, dt = _timed(compute)
    at_zero = majorana_rhs(1, 0.0, 0.0)
    return (
        residual < 1e-4 and at_zero == -8,
        dict(residual=residual, rhs_tau0=at_zero),
        dict(rhs_tau0=-8),
        dict(residual=1e-4, rhs_tau0="exact"),
        dt,
        None,
        f"finite-difference residual {residual:.1e}",
    )


def _harmonic_order():
    """Observed order of the fixed-step integrator on y'' = -y over one period."""
    T = 2 * math.pi
    errs, hs = [], []
    for N in (16, 32, 64, 128):
        h = T / N
        prob = IVProblem(lambda t, s: (s[1], -s[0]), 0.0, (1.0, 0.0), T)
        curve = integrate_ivp(prob, fixed_step=h)
        errs.append(float(np.max(np.abs(curve.y[-1] - (1.0, 0.0)))))
        hs.append(h)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    return float(slope), errs


def _integrator_order(ctx):
    (order, errs), dt = _timed(_harmonic_order)
    return (
        order >= 4.7,
        dict(order=order, errors=errs),
        dict(order_min=4.7),
        dict(order=4.7),
        dt,
        None,
        f"observed order {order:.3f}",
    )


def _direction_consistency(pp, offset=1e-3):
    """Max sine between saddle eigendirections and the early flow from their seeds."""
    worst = 0.0
    k = 16
    saddles = [fp for fp in pp.fixed_points if fp.kind is Kind.SADDLE]
    for fp in saddles:
        centre = np.array([float(c) for c in fp.coords])
        for v, theta in zip(fp.eigenvectors, fp.eigenvalues):
            for _sign in (1, -1):
                # forward run leaves along the unstable direction, backward along the stable one
                curve = pp.trajectories[2 * k + (0 if theta > 0 else 1)]
                t = math.copysign(1.0 / abs(theta), curve.t[-1])
                if abs(t) > abs(curve.t[-1]):
                    t = curve.t[-1]
                d = curve(t) - centre
                sine = abs(d[0] * v[1] - d[1] * v[0]) / np.hypot(*d)
                worst = max(worst, float(sine))
                k += 1
    return worst


def _portrait(ctx):
    pp, dt = _timed(lambda: portrait(AutonomousSystem.from_p(1)))
    rows = fixed_point_rows(pp.fixed_points)
    kinds = [r[5] for r in rows]
    coords = sorted((float(r[0]), float(r[1])) for r in rows)
    want = sorted((float(c[0]), float(c[1])) for c, _ in _TABLE1)
    n_node = sum(1 for kd in kinds if kd.is_node)
    n_saddle = kinds.count(Kind.SADDLE)
    sine = _direction_consistency(pp)
    ok = coords == want and n_node == 1 and n_saddle == 3 and sine < 1e-2
    return (
        ok,
        dict(nodes=n_node, saddles=n_saddle, coords=coords, max_direction_sine=sine),
        dict(nodes=1, saddles=3, coords=want),
        dict(direction_sine=1e-2),
        dt,
        None,
        f"{n_node} node, {n_saddle} saddles, eigendirection sine {sine:.1e}",
    )


CHECKS: list[tuple[int, str, Callable]] = [
    (1, "family constants", _family_constants),
    (2, "perturbation exponents", _perturbation_exponents),
    (3, "Abel invariant closed form", _abel_invariant),
    (4, "non-integrability certificate", _non_integrability),
    (5, "cleared integrability constants", _cleared_constants),
    (6, "fixed-point table", _table1),
    (7, "saddle eigen-structure", _saddle_eigen),
    (8, "eigenvalue-perturbation link", _eigen_link),
    (9, "saddle recovers particular solution", _saddle_recovery),
    (10, "BVP properties", _bvp_properties),
    (11, "Majorana consistency", _majorana),
    (12, "integrator order", _integrator_order),
    (13, "phase portrait structure", _portrait),
]


def run(overrides: Optional[dict] = None, items=None) -> list[CheckResult]:
    ctx = _Ctx(dict(overrides or {}))
    results = []
    for item, title, fn in CHECKS:
        if items is not None and item not in items:
            continue
        t = time.perf_counter()
        try:
            passed, measured, expected, tol, runtime, limit, detail = fn(ctx)
        except Exception as exc:  # a crash is reported as a failed item
            passed, measured, expected, tol, runtime, limit = False, {}, {}, {}, 0.0, None
            detail = f"{type(exc).__name__}: {exc}"
        if not runtime:
            runtime = time.perf_counter() - t
        results.append(CheckResult(item, title, bool(passed), measured, expected, tol, runtime, limit, detail))
    return results


def summary_lines(results) -> list[str]:
    passed = sum(r.passed for r in results)
    return [r.line() for r in results] + [f"{passed}/{len(results)} passed"]


def report(results, overrides=None) -> dict:
    return {
        "generator": f"lamptf {__version__}",
        "overrides": dict(overrides or {}),
        "all_passed": all(r.passed for r in results),
        "items": [
            {
                "item": r.item,
                "title": r.title,
                "passed": r.passed,
                "measured": r.measured,
                "expected": r.expected,
                "tolerance": r.tolerance,
                "runtime_s": r.runtime_s,
                "runtime_limit_s": r.runtime_limit_s,
                "detail": r.detail,
            }
            for r in results
        ],
    }
