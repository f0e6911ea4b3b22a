"""Shooting solver for y'' = x^(-q) y^(1+q), y(0) = 1, y(oo) = 0.

The unknown is the initial slope B = y'(0+). Every shot starts slightly off
the singular origin from a short series, and is classified by how it
fails to decay: it either crosses zero (slope too steep), turns upward
(slope too shallow), or is still decreasing and positive at ``x_max``.
"""

from __future__ import annotations

import enum
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, ParameterError, StepUnderflowError
from .family import family_params, particular_solution
from .integrate import IVProblem, SolutionCurve, Status, integrate_ivp

logger = logging.getLogger(__name__)

__all__ = [
    "ShotKind",
    "ShotOutcome",
    "TFSolution",
    "series_start",
    "shoot",
    "solve_bvp",
    "asymptotic_ratio",
    "ratio_trend",
    "ratio_state",
    "certify_bracket",
]

X0 = 1e-6
X_MAX = 50.0
# step cap, as a fraction of x, for the returned curve: near the singular
# origin the dense output is only as good as h/x is small
REP_STEP_REL = 0.01
B_SCAN = (-10.0, 0.0, 0.5)
# horizon doublings tried before a Monotone bisection midpoint is given up on
_MAX_EXTENSIONS = 4


class ShotKind(enum.Enum):
    UNDERSHOOT = "Undershoot"
    OVERSHOOT = "Overshoot"
    MONOTONE = "Monotone"


@dataclass(frozen=True)
class ShotOutcome:
    kind: ShotKind
    x_mark: float
    curve: SolutionCurve
    slope: float


@dataclass(frozen=True)
class TFSolution:
    p: float
    slope: float
    bracket: tuple[float, float]
    curve: SolutionCurve
    ratio_tail: np.ndarray
    resolution_limited: bool = False

    @property
    def x(self):
        return self.curve.t

    @property
    def y(self):
        return self.curve.y[:, 0]

    @property
    def dy(self):
        return self.curve.y[:, 1]


def _q(p) -> float:
    if not p > 0:
        raise ParameterError(f"p must be positive, got {p!r}")
    return float(family_params(p).q)


def series_start(p, B, x0=X0):
    """Two-term expansion of the solution at a small offset ``x0``.

    y = 1 + B x + x^(2-q)/((1-q)(2-q)), y' = B + x^(1-q)/(1-q). The
    neglected terms are O(x^(3-q)) in y and O(x^(2-q)) in y'.
    """
    if not x0 > 0:
        raise ValueError("x0 must be positive; the origin is singular")
    q = _q(p)
    y = 1 + B * x0 + x0 ** (2 - q) / ((1 - q) * (2 - q))
    dy = B + x0 ** (1 - q) / (1 - q)
    return y, dy


def _make_rhs(q):
    e = 1 + q

    def rhs(x, state):
        y, dy = state
        # clamp: the y = 0 event stops the shot, stages may overstep it slightly
        return (dy, x ** (-q) * max(y, 0.0) ** e)

    return rhs


def _hits_zero(x, state):
    return state[0]


def _turns_up(x, state):
    return state[1]


def shoot(p, B, x_max=X_MAX, rtol=1e-10, atol=1e-14, x0=X0, max_step_rel=None) -> ShotOutcome:
    """Integrate one shot with initial slope ``B`` and classify it."""
    q = _q(p)
    if not x_max > x0:
        raise ValueError("x_max must exceed the start offset")
    problem = IVProblem(
        rhs=_make_rhs(q),
        t0=x0,
        state0=series_start(p, B, x0),
        t_end=x_max,
        rtol=rtol,
        atol=atol,
    )
    curve = integrate_ivp(problem, [_hits_zero, _turns_up], max_step_rel=max_step_rel)
    if curve.status is Status.STEP_UNDERFLOW:
        raise StepUnderflowError(f"step underflow at x={curve.t[-1]:.6g} shooting p={p}, B={B}")
    if curve.status is Status.EVENT_STOPPED:
        kind = ShotKind.UNDERSHOOT if curve.event.index == 0 else ShotKind.OVERSHOOT
        return ShotOutcome(kind, float(curve.event.t_event), curve, B)
    if curve.status is Status.DIVERGED:
        return ShotOutcome(ShotKind.OVERSHOOT, float(curve.t[-1]), curve, B)
    return ShotOutcome(ShotKind.MONOTONE, float(curve.t[-1]), curve, B)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("LAMPTF_THREADS", "1")))
    except ValueError:
        return 1


def _scan_bracket(p, x_max, rtol, atol, x0, workers):
    start, stop, step = B_SCAN
    grid = [start + k * step for k in range(int(round((stop - start) / step)) + 1)]
    prev = None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i in range(0, len(grid), workers):
            chunk = grid[i : i + workers]
            outcomes = list(pool.map(lambda b: _decisive(p, b, x_max, rtol, atol, x0), chunk))
            for out in outcomes:
                if prev is not None and prev.kind is ShotKind.UNDERSHOOT and out.kind is ShotKind.OVERSHOOT:
                    return prev, out
                if out.kind is not ShotKind.MONOTONE:
                    prev = out
    raise BracketError(f"no undershoot/overshoot pair for p={p} with B in [{start}, {stop}]")


def _decisive(p, B, x_max, rtol, atol, x0) -> ShotOutcome:
    """Shoot, doubling the horizon while the outcome stays Monotone."""
    out = shoot(p, B, x_max, rtol, atol, x0)
    horizon = x_max
    for _ in range(_MAX_EXTENSIONS):
        if out.kind is not ShotKind.MONOTONE:
            break
        horizon *= 2
        out = shoot(p, B, horizon, rtol, atol, x0)
    return out


def certify_bracket(p, bracket, x_max=X_MAX, rtol=1e-10, atol=1e-14, x0=X0) -> tuple[ShotKind, ShotKind]:
    """Re-shoot both bracket ends (with horizon extension) and return their kinds."""
    lo, hi = bracket
    return (
        _decisive(p, lo, x_max, rtol, atol, x0).kind,
        _decisive(p, hi, x_max, rtol, atol, x0).kind,
    )


def solve_bvp(p, slope_tol=1e-9, x_max=X_MAX, rtol=1e-10, atol=1e-14, x0=X0, workers=None) -> TFSolution:
    """Critical initial slope by bisection between an undershoot and an overshoot.

    The returned curve is the undershoot-side bracket endpoint integrated
    to ``x_max`` and cut before any zero crossing, so it is positive and
    decreasing throughout.
    """
    if slope_tol < 1e-12:
        raise ValueError("slope_tol must be at least 1e-12")
    _q(p)
    workers = workers or _workers()
    under, over = _scan_bracket(p, x_max, rtol, atol, x0, workers)
    lo, hi = under.slope, over.slope
    limited = False
    while hi - lo > slope_tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        out = _decisive(p, mid, x_max, rtol, atol, x0)
        if out.kind is ShotKind.UNDERSHOOT:
            lo = mid
        elif out.kind is ShotKind.OVERSHOOT:
            hi = mid
        else:
            limited = True
            logger.warning("slope %.15g still Monotone at x=%g; stopping bisection", mid, out.x_mark)
            break

    rep = shoot(p, lo, x_max, rtol, atol, x0, max_step_rel=REP_STEP_REL)
    curve = rep.curve
    if rep.kind is ShotKind.UNDERSHOOT:
        keep = int(np.searchsorted(-curve.y[:, 0], 0.0))
        curve = curve.head(keep)
    return TFSolution(
        p=p,
        slope=0.5 * (lo + hi),
        bracket=(lo, hi),
        curve=curve,
        ratio_tail=_ratio(p, curve),
        resolution_limited=limited,
    )


def _ratio(p, curve, n=33, x_start=1.0):
    y0 = particular_solution(p)
    x_end = float(curve.t[-1])
    xs = np.geomspace(min(x_start, 0.5 * x_end), x_end, n)
    return np.column_stack([xs, curve(xs)[:, 0] / y0(xs)])


def asymptotic_ratio(sol: TFSolution, n=33, x_start=1.0) -> np.ndarray:
    """Samples (x, w) of w = y/y0 on a log-spaced grid over the curve tail."""
    return _ratio(sol.p, sol.curve, n, x_start)


def ratio_trend(ratio: np.ndarray) -> bool:
    """True when |w - 1| decreases monotonically along the sampled tail."""
    dev = np.abs(ratio[:, 1] - 1)
    return bool(np.all(np.diff(dev) <= 0))



def ratio_state(sol: TFSolution, x):
    """(w, s) at ``x``: w = y/y0 and s = dw/dt with t = ln x."""
    x = np.asarray(x, dtype=float)
    y0 = particular_solution(sol.p)
    state = sol.curve(x)
    y, dy = state[..., 0], state[..., 1]
    base = y0(x)
    w = y / base
    s = x * (dy - w * y0.derivative(x)) / base
    return w, s
