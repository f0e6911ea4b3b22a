"""Adaptive Dormand-Prince 5(4) integrator with dense output and events.

The propagating solution is 5th order, the embedded error estimate 4th
order, and the continuous extension is the free 4th-order interpolant built
from the same seven stages (Shampine's optimal c6 coefficients).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import RhsDomainError

__all__ = [
    "Status",
    "EventInfo",
    "IVProblem",
    "SolutionCurve",
    "integrate_ivp",
    "dense_eval",
    "dense_derivative",
]

# Butcher tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th and 4th order weights
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# dense output: y(t + th*h) = y + h * K.T @ _P @ [th, th^2, th^3, th^4]
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
# PI controller exponents for a 5(4) pair
_BETA = 0.04
_ALPHA = 0.2 - 0.75 * _BETA
_EVENT_TOL = 1e-12
_UNDERFLOW = 1e-14


class Status(enum.Enum):
    COMPLETED = "Completed"
    EVENT_STOPPED = "EventStopped"
    STEP_UNDERFLOW = "StepUnderflow"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class EventInfo:
    t_event: float
    index: int
    bracket: tuple[float, float]


@dataclass(frozen=True)
class IVProblem:
    rhs: Callable[[float, np.ndarray], Sequence[float]]
    t0: float
    state0: Sequence[float]
    t_end: float
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = math.inf

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if self.t_end == self.t0:
            raise ValueError("t_end must differ from t0")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True)
class SolutionCurve:
    """Accepted steps of an integration, with a piecewise dense interpolant.

    ``t[i]``, ``y[i]`` and ``f[i]`` are the time, state and derivative of the
    i-th sample; segment i (from ``t[i]`` towards ``t[i+1]``) is evaluated
    from ``t[i] + theta * h[i]`` with the stored coefficients.
    """

    t: np.ndarray
    y: np.ndarray
    f: np.ndarray
    status: Status
    event: Optional[EventInfo] = None
    h: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    coeffs: np.ndarray = field(default_factory=lambda: np.empty((0, 0, 4)), repr=False)

    def __post_init__(self):
        for arr in (self.t, self.y, self.f, self.h, self.coeffs):
            arr.setflags(write=False)

    @property
    def direction(self) -> float:
        if len(self.t) < 2:
            return 1.0
        return 1.0 if self.t[-1] > self.t[0] else -1.0

    @property
    def samples(self):
        return list(zip(self.t, self.y, self.f))

    @property
    def span(self) -> tuple[float, float]:
        return float(min(self.t[0], self.t[-1])), float(max(self.t[0], self.t[-1]))

    def __len__(self):
        return len(self.t)

    def __call__(self, t):
        return dense_eval(self, t)

    def head(self, n: int) -> "SolutionCurve":
        """The first ``n`` samples as a new curve with the same status."""
        n = max(1, min(n, len(self.t)))
        return SolutionCurve(
            t=self.t[:n].copy(),
            y=self.y[:n].copy(),
            f=self.f[:n].copy(),
            status=self.status,
            event=self.event if n == len(self.t) else None,
            h=self.h[: n - 1].copy(),
            coeffs=self.coeffs[: n - 1].copy(),
        )


def _locate(curve: SolutionCurve, t):
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    lo, hi = curve.span
    span_tol = 1e-13 * max(1.0, abs(lo), abs(hi))
    if np.any(ts < lo - span_tol) or np.any(ts > hi + span_tol):
        raise ValueError(f"t outside curve span [{lo}, {hi}]")
    d = curve.direction
    idx = np.searchsorted(d * curve.t, d * ts, side="right") - 1
    idx = np.clip(idx, 0, max(len(curve.t) - 2, 0))
    return scalar, ts, idx


def dense_eval(curve: SolutionCurve, t):
    """Evaluate the interpolant at ``t`` (scalar or array).

    Scalar input returns a state vector; array input returns an array of
    shape ``(len(t), dim)``. Times exactly equal to a stored sample return
    the stored state.
    """
    scalar, ts, idx = _locate(curve, t)
    out = np.empty((len(ts), curve.y.shape[1]))
    for j, (tj, i) in enumerate(zip(ts, idx)):
        if tj == curve.t[i]:
            out[j] = curve.y[i]
        elif i + 1 < len(curve.t) and tj == curve.t[i + 1]:
            out[j] = curve.y[i + 1]
        else:
            out[j] = _segment_eval(curve.y[i], curve.h[i], curve.coeffs[i], (tj - curve.t[i]) / curve.h[i])
    return out[0] if scalar else out


def dense_derivative(curve: SolutionCurve, t):
    """Time derivative of the interpolant (not of the rhs) at ``t``."""
    scalar, ts, idx = _locate(curve, t)
    out = np.empty((len(ts), curve.y.shape[1]))
    for j, (tj, i) in enumerate(zip(ts, idx)):
        if len(curve.t) < 2:
            out[j] = curve.f[0]
            continue
        theta = (tj - curve.t[i]) / curve.h[i]
        dpow = np.array([1.0, 2 * theta, 3 * theta**2, 4 * theta**3])
        out[j] = curve.coeffs[i] @ dpow / curve.h[i]
    return out[0] if scalar else out


def _segment_eval(y0, h, q, theta):
    powers = np.array([theta, theta**2, theta**3, theta**4])
    return y0 + q @ powers


class _Rhs:
    def __init__(self, fun):
        self.fun = fun
        self.nfev = 0

    def __call__(self, t, y):
        self.nfev += 1
        try:
            return np.asarray(self.fun(t, y), dtype=float)
        except (ValueError, ArithmeticError) as exc:
            raise RhsDomainError(t, y, exc) from exc


def _initial_step(rhs, t0, y0, f0, direction, rtol, atol, max_step):
    scale = atol + np.abs(y0) * rtol
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y0 + direction * h0 * f0
    f1 = rhs(t0 + direction * h0, y1)
    if not np.all(np.isfinite(f1)):
        return h0 * 1e-3
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, max_step)


def _rk_step(rhs, t, y, f, h):
    K = np.empty((7, y.size))
    K[0] = f
    for s in range(1, 7):
        dy = h * (np.asarray(_A[s]) @ K[:s])
        K[s] = rhs(t + _C[s] * h, y + dy)
    y_new = y + h * (_B @ K)
    return y_new, K


def _locate_event(g, seg_y0, h, q, t_old, t_new, g_old):
    """Bisect the sign change of g on one dense segment."""
    lo, hi = t_old, t_new
    g_lo = g_old
    while abs(hi - lo) > _EVENT_TOL:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        g_mid = g(mid, _segment_eval(seg_y0, h, q, (mid - t_old) / h))
        if g_mid == 0.0:
            return mid, (lo, mid)
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return hi, (lo, hi)


def integrate_ivp(
    problem: IVProblem,
    events: Sequence[Callable[[float, np.ndarray], float]] = (),
    *,
    fixed_step: Optional[float] = None,
    overflow: float = 1e12,
    max_steps: int = 1_000_000,
    max_step_rel: Optional[float] = None,
) -> SolutionCurve:
    """Integrate ``problem`` from ``t0`` to ``t_end``.

    Every event function is terminal: the integration stops at the first
    sign change of any of them along the dense output, and the located
    point is appended as the last sample. ``fixed_step`` switches off error
    control and takes uniform steps (the last one shortened to hit
    ``t_end``). The run ends with ``Status.DIVERGED`` once the state norm
    exceeds ``overflow``. ``max_step_rel`` additionally caps each step at
    that fraction of ``|t|``, which keeps the dense output accurate next to
    a singular point at t = 0.
    """
    rhs = _Rhs(problem.rhs)
    t0, t_end = float(problem.t0), float(problem.t_end)
    direction = 1.0 if t_end > t0 else -1.0
    y = np.array(problem.state0, dtype=float)
    f = rhs(t0, y)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(f))):
        raise ValueError("rhs is not finite at the initial condition")
    rtol, atol, max_step = problem.rtol, problem.atol, problem.max_step

    ts, ys, fs, hs, qs = [t0], [y], [f], [], []
    g_vals = [float(g(t0, y)) for g in events]

    if fixed_step is not None:
        h_abs = min(float(fixed_step), max_step)
    else:
        h_abs = _initial_step(rhs, t0, y, f, direction, rtol, atol, max_step)
    err_prev = 1e-4
    rejected = False
    t = t0
    status = Status.COMPLETED
    event = None

    for _ in range(max_steps):
        remaining = abs(t_end - t)
        if remaining <= 0:
            break
        if max_step_rel is not None:
            h_abs = min(h_abs, max_step_rel * abs(t))
        min_step = max(_UNDERFLOW * abs(t), 10 * np.spacing(abs(t)))
        if h_abs < min_step:
            status = Status.STEP_UNDERFLOW
            break
        # snap to t_end rather than leave a round-off sized final step
        last = h_abs * (1 + 1e-10) >= remaining
        h = direction * (remaining if last else h_abs)
        t_new = t_end if last else t + h

        y_new, K = _rk_step(rhs, t, y, f, h)
        finite = np.all(np.isfinite(y_new)) and np.all(np.isfinite(K))

        if fixed_step is None:
            if finite:
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                err = float(np.max(np.abs(h * (_E @ K)) / scale))
            else:
                err = math.inf
            if err > 1.0:
                factor = _MIN_FACTOR if not math.isfinite(err) else max(_MIN_FACTOR, _SAFETY * err ** (-1 / 5))
                h_abs *= factor
                rejected = True
                continue
        elif not finite:
            status = Status.DIVERGED
            break

        f_new = rhs(t_new, y_new)
        q = h * (K.T @ _P)

        hit = None
        for i, g in enumerate(events):
            g_new = float(g(t_new, y_new))
            g_old = g_vals[i]
            crossed = (g_old < 0 < g_new) or (g_old > 0 > g_new) or (g_new == 0 and g_old != 0)
            if crossed:
                t_ev, bracket = _locate_event(g, y, h, q, t, t_new, g_old)
                if hit is None or direction * t_ev < direction * hit[0]:
                    hit = (t_ev, i, bracket)
            g_vals[i] = g_new

        if hit is not None:
            t_ev, i, bracket = hit
            y_ev = _segment_eval(y, h, q, (t_ev - t) / h)
            ts.append(t_ev)
            ys.append(y_ev)
            fs.append(rhs(t_ev, y_ev))
            hs.append(h)
            qs.append(q)
            status = Status.EVENT_STOPPED
            event = EventInfo(t_ev, i, bracket)
            break

        ts.append(t_new)
        ys.append(y_new)
        fs.append(f_new)
        hs.append(h)
        qs.append(q)
        t, y, f = t_new, y_new, f_new

        if np.max(np.abs(y)) > overflow:
            status = Status.DIVERGED
            break
        if last:
            break

        if fixed_step is None:
            err = max(err, 1e-10)
            factor = _SAFETY * err ** (-_ALPHA) * err_prev**_BETA
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            if rejected:
                factor = min(1.0, factor)
            h_abs = min(h_abs * factor, max_step)
            err_prev = err
            rejected = False
    else:
        status = Status.STEP_UNDERFLOW

    dim = y.size
    return SolutionCurve(
        t=np.array(ts),
        y=np.array(ys).reshape(len(ts), dim),
        f=np.array(fs).reshape(len(ts), dim),
        status=status,
        event=event,
        h=np.array(hs),
        coeffs=np.array(qs).reshape(len(hs), dim, 4),
    )
