"""Phase-plane analysis of the autonomous form of the self-adjoint equation.

With X = xi eta'/eta, Y = xi^(lam-1) eta^n / eta' and t = ln xi,
(1/xi^2)(xi^2 eta')' = xi^(lam-2) eta^n becomes

    dX/dt = -X (1 + X - Y)
    dY/dt =  Y (lam + 1 + n X - Y)

Arithmetic in ``system_rhs``, ``fixed_points``, ``jacobian`` and the
trace/determinant part of ``classify`` is type-preserving, so passing
``Fraction`` exponents gives exact rational results.
"""

from __future__ import annotations

import enum
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError
from .family import family_params, particular_solution, perturbation_expansion
from .integrate import IVProblem, SolutionCurve, Status, integrate_ivp

__all__ = [
    "AutonomousSystem",
    "Kind",
    "FixedPoint",
    "PhasePortrait",
    "system_rhs",
    "fixed_points",
    "jacobian",
    "classify",
    "analyze",
    "saddle_flow_directions",
    "scaled",
    "eigen_perturbation_link",
    "saddle_recovers_y0",
    "nullclines",
    "default_seeds",
    "portrait",
    "solution_to_phase",
]

DEGENERATE_TOL = 1e-12
TF_WINDOW = (-6.0, 2.0, -5.0, 4.0)


@dataclass(frozen=True)
class AutonomousSystem:
    n: float
    lam: float

    @classmethod
    def from_p(cls, p, lambda_map: str = "consistent") -> "AutonomousSystem":
        """System for family member ``p``.

        ``lambda_map="consistent"`` uses the exponent the family actually
        maps to (lam = 2 for every p); ``"2n-1"`` uses the map
        lam = 3 - 2/(p+1). Both agree at p = 1.
        """
        params = family_params(p)
        if lambda_map == "consistent":
            lam = params.sa_lambda
        elif lambda_map == "2n-1":
            lam = params.lam
        else:
            raise ValueError(f"unknown lambda_map {lambda_map!r}")
        if isinstance(params.n, float) or isinstance(lam, float):
            return cls(n=float(params.n), lam=float(lam))
        return cls(n=params.n, lam=Fraction(lam))

    @property
    def has_interior_point(self) -> bool:
        return self.n != 1


def system_rhs(sys: AutonomousSystem, X, Y):
    n, lam = sys.n, sys.lam
    return -X * (1 + X - Y), Y * (lam + 1 + n * X - Y)


def fixed_points(sys: AutonomousSystem) -> list:
    """Equilibria in the order origin, (-1, 0), (0, lam+1), interior point.

    For n = 1 the interior point does not exist and only three are
    returned (with a warning).
    """
    pts = [(0 * sys.lam, 0 * sys.lam), (-1 + 0 * sys.lam, 0 * sys.lam), (0 * sys.lam, sys.lam + 1)]
    if not sys.has_interior_point:
        warnings.warn("n = 1: the interior equilibrium -lam/(n-1) does not exist", stacklevel=2)
        return pts
    r = sys.lam / (sys.n - 1)
    pts.append((-r, 1 - r))
    return pts


def jacobian(sys: AutonomousSystem, X, Y):
    n, lam = sys.n, sys.lam
    return [[-1 - 2 * X + Y, X], [n * Y, lam + 1 + n * X - 2 * Y]]


class Kind(enum.Enum):
    SADDLE = "Saddle"
    STABLE_NODE = "StableNode"
    UNSTABLE_NODE = "UnstableNode"
    STABLE_FOCUS = "StableFocus"
    UNSTABLE_FOCUS = "UnstableFocus"
    CENTER = "Center"
    DEGENERATE = "Degenerate"

    @property
    def is_node(self) -> bool:
        return self in (Kind.STABLE_NODE, Kind.UNSTABLE_NODE)


@dataclass(frozen=True)
class FixedPoint:
    coords: tuple
    trace: object
    det: object
    discriminant: object
    kind: Kind
    eigenvalues: tuple
    eigenvectors: Optional[tuple] = None
    note: str = ""


def _unit(v):
    v = np.asarray(v, dtype=float)
    v = v / np.hypot(v[0], v[1])
    lead = v[0] if abs(v[0]) > 1e-15 else v[1]
    return tuple(float(c) + 0.0 for c in (v if lead > 0 else -v))


def _eigvec(J, theta):
    a, b = float(J[0][0]), float(J[0][1])
    c, d = float(J[1][0]), float(J[1][1])
    scale = max(abs(a), abs(b), abs(c), abs(d), 1.0)
    # take the better-conditioned row of (J - theta I) v = 0
    r1 = (b, theta - a)
    r2 = (theta - d, c)
    n1, n2 = math.hypot(*r1), math.hypot(*r2)
    if max(n1, n2) <= 1e-14 * scale:
        raise ValueError("eigenvector undetermined (J is a multiple of the identity)")
    return _unit(r1 if n1 >= n2 else r2)


def classify(J, coords=(None, None)) -> FixedPoint:
    """Trace, determinant, discriminant, sign-chart kind and eigenpairs of J."""
    a, b = J[0]
    c, d = J[1]
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4 * det
    ftr, fdet, fdisc = float(tr), float(det), float(disc)
    if not all(math.isfinite(v) for v in (ftr, fdet, fdisc)):
        raise ValueError("Jacobian entries must be finite")

    if fdet < -DEGENERATE_TOL:
        kind = Kind.SADDLE
    elif abs(fdet) <= DEGENERATE_TOL or abs(fdisc) <= DEGENERATE_TOL:
        kind = Kind.DEGENERATE
    elif abs(ftr) <= DEGENERATE_TOL:
        kind = Kind.CENTER
    elif fdisc > 0:
        kind = Kind.UNSTABLE_NODE if ftr > 0 else Kind.STABLE_NODE
    else:
        kind = Kind.UNSTABLE_FOCUS if ftr > 0 else Kind.STABLE_FOCUS

    vectors = None
    if fdisc >= 0:
        root = math.sqrt(fdisc)
        eig = ((ftr + root) / 2, (ftr - root) / 2)
        if fdisc > 0:
            vectors = tuple(_eigvec(J, th) for th in eig)
    else:
        root = math.sqrt(-fdisc)
        eig = (complex(ftr / 2, root / 2), complex(ftr / 2, -root / 2))
    return FixedPoint(tuple(coords), tr, det, disc, kind, eig, vectors)


# Customary label for the (-1, 0) equilibrium of the TF system.
_TF_LABELS = {1: "stable node"}


def analyze(sys: AutonomousSystem) -> list:
    """Classified fixed points in ``fixed_points`` order."""
    labels = _TF_LABELS if (sys.n == 1.5 and sys.lam == 2) else {}
    out = []
    for i, (X, Y) in enumerate(fixed_points(sys)):
        fp = classify(jacobian(sys, X, Y), (X, Y))
        if i in labels and fp.kind is Kind.UNSTABLE_NODE:
            fp = FixedPoint(
                fp.coords, fp.trace, fp.det, fp.discriminant, fp.kind, fp.eigenvalues, fp.eigenvectors,
                note=(
                    f"tabulated as '{labels[i]}'; trace > 0 and det > 0 give two positive "
                    "eigenvalues, so the point repels in forward t and attracts as t -> -oo"
                ),
            )
        out.append(fp)
    return out


def saddle_flow_directions(fp: FixedPoint):
    """Unit eigendirections ordered like ``fp.eigenvalues`` (larger first)."""
    if fp.eigenvectors is None:
        raise ValueError("no real distinct eigenvalues, so no real flow directions")
    return fp.eigenvectors


def scaled(v, component: int):
    """Rescale ``v`` so that ``v[component] == 1``."""
    return tuple(float(c) / float(v[component]) for c in v)


@dataclass(frozen=True)
class EigenLink:
    p: float
    theta: tuple[float, float]
    theta0: tuple[float, float]
    decay_exponent: float
    perturbation_exponents: tuple[float, float]

    @property
    def deviation(self) -> float:
        pos, neg = self.theta0
        e_neg, e_pos = self.perturbation_exponents
        return max(abs(pos - e_pos), abs(neg - e_neg))


def eigen_perturbation_link(p, lambda_map: str = "consistent") -> EigenLink:
    """Eigenvalues at the interior saddle split as decay exponent + perturbation exponents."""
    if not p > 0:
        raise ParameterError("p must be positive")
    sys = AutonomousSystem.from_p(p, lambda_map)
    fp = classify(jacobian(sys, *fixed_points(sys)[3]))
    e = particular_solution(p).exponent
    theta = tuple(float(t) for t in fp.eigenvalues)
    return EigenLink(
        p=p,
        theta=theta,
        theta0=(theta[0] - e, theta[1] - e),
        decay_exponent=e,
        perturbation_exponents=perturbation_expansion(p).exponents,
    )


@dataclass(frozen=True)
class SaddleRecovery:
    product: object
    amplitude: object
    exponent: object


def saddle_recovers_y0(p, lambda_map: str = "consistent") -> SaddleRecovery:
    """Rebuild y0 = k x^(-e) from the interior saddle.

    Along y0 the variable eta = y/xi is a pure power, X = d ln eta / d ln xi
    is constant, and X Y = xi^lam eta^(n-1) reduces to k^(n-1) when
    lam = 2. Hence e = -X3 - 1 and k = (X3 Y3)^(1/(n-1)).
    """
    sys = AutonomousSystem.from_p(p, lambda_map)
    X3, Y3 = fixed_points(sys)[3]
    product = X3 * Y3
    power = 1 / (sys.n - 1)
    if isinstance(product, Fraction) and isinstance(power, Fraction) and power.denominator == 1:
        amplitude = product ** int(power)
    else:
        amplitude = float(product) ** float(power)
    return SaddleRecovery(product=product, amplitude=amplitude, exponent=-X3 - 1)


def _clip_line(point, direction, window, n=201):
    x0, x1, y0, y1 = window
    px, py = point
    dx, dy = direction
    lo, hi = -math.inf, math.inf
    for p0, d, a, b in ((px, dx, x0, x1), (py, dy, y0, y1)):
        if d == 0:
            if not a <= p0 <= b:
                return np.empty((0, 2))
            continue
        s1, s2 = (a - p0) / d, (b - p0) / d
        lo, hi = max(lo, min(s1, s2)), min(hi, max(s1, s2))
    if hi < lo:
        return np.empty((0, 2))
    s = np.linspace(lo, hi, n)
    return np.column_stack([px + s * dx, py + s * dy])


def nullclines(sys: AutonomousSystem, window=TF_WINDOW) -> dict:
    """Polyline samples of the X- and Y-nullclines clipped to ``window``.

    Keys: ``M:X=0``, ``M:Y=1+X`` (dX/dt = 0) and ``N:Y=0``,
    ``N:Y=lam+1+nX`` (dY/dt = 0).
    """
    _check_window(window)
    n, lam = float(sys.n), float(sys.lam)
    return {
        "M:X=0": _clip_line((0.0, 0.0), (0.0, 1.0), window),
        "M:Y=1+X": _clip_line((0.0, 1.0), (1.0, 1.0), window),
        "N:Y=0": _clip_line((0.0, 0.0), (1.0, 0.0), window),
        "N:Y=lam+1+nX": _clip_line((0.0, lam + 1), (1.0, n), window),
    }


def _check_window(window):
    x0, x1, y0, y1 = (float(v) for v in window)
    if not (x1 > x0 and y1 > y0) or not all(math.isfinite(v) for v in (x0, x1, y0, y1)):
        raise ValueError(f"degenerate window {window!r}")


def in_window(pt, window) -> bool:
    x0, x1, y0, y1 = window
    return x0 <= float(pt[0]) <= x1 and y0 <= float(pt[1]) <= y1


@dataclass(frozen=True)
class PhasePortrait:
    system: AutonomousSystem
    fixed_points: list
    trajectories: list
    nullclines: dict
    window: tuple
    seeds: list = field(default_factory=list)

    @property
    def truncated(self) -> list:
        return [i for i, c in enumerate(self.trajectories) if c.status is not Status.COMPLETED]


def default_seeds(sys: AutonomousSystem, window=TF_WINDOW, offset=1e-3) -> list:
    """16 points on the window boundary plus 4 per saddle along its eigendirections."""
    x0, x1, y0, y1 = window
    seeds = []
    for k in range(4):
        f = (k + 0.5) / 4
        xs, ys = x0 + f * (x1 - x0), y0 + f * (y1 - y0)
        seeds += [(xs, y0), (xs, y1), (x0, ys), (x1, ys)]
    for fp in analyze(sys):
        if fp.kind is Kind.SADDLE and in_window(fp.coords, window):
            X, Y = (float(c) for c in fp.coords)
            for v in fp.eigenvectors:
                seeds += [(X + offset * v[0], Y + offset * v[1]), (X - offset * v[0], Y - offset * v[1])]
    return seeds


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("LAMPTF_THREADS", "1")))
    except ValueError:
        return 1


def _trajectory(sys, seed, t_end, bound, rtol, atol):
    n, lam = float(sys.n), float(sys.lam)

    def rhs(t, s):
        X, Y = s
        return (-X * (1 + X - Y), Y * (lam + 1 + n * X - Y))

    state = np.array(seed, dtype=float)
    if not np.any(rhs(0.0, state)):
        return SolutionCurve(
            t=np.array([0.0, t_end]),
            y=np.array([state, state]),
            f=np.zeros((2, 2)),
            status=Status.COMPLETED,
            h=np.array([t_end]),
            coeffs=np.zeros((1, 2, 4)),
        )
    return integrate_ivp(IVProblem(rhs, 0.0, state, t_end, rtol=rtol, atol=atol), overflow=bound)


def portrait(
    sys: AutonomousSystem,
    seeds: Optional[Sequence] = None,
    t_span: float = 10.0,
    window=TF_WINDOW,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    workers: Optional[int] = None,
) -> PhasePortrait:
    """Integrate each seed forward and backward over ``t_span``.

    Trajectories are ordered seed by seed, forward before backward. A run
    that leaves the blow-up bound (10^3 times the window diagonal) stops
    with ``Status.DIVERGED``.
    """
    _check_window(window)
    seeds = default_seeds(sys, window) if seeds is None else [tuple(map(float, s)) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")
    x0, x1, y0, y1 = window
    bound = 1e3 * math.hypot(x1 - x0, y1 - y0)
    jobs = [(s, d * t_span) for s in seeds for d in (1.0, -1.0)]
    with ThreadPoolExecutor(max_workers=workers or _workers()) as pool:
        curves = list(pool.map(lambda j: _trajectory(sys, j[0], j[1], bound, rtol, atol), jobs))
    fps = [fp for fp in analyze(sys) if in_window(fp.coords, window)]
    return PhasePortrait(sys, fps, curves, nullclines(sys, window), tuple(window), seeds)


def solution_to_phase(xi, y, dy, sys: AutonomousSystem):
    """Map samples of a family solution y(x) to (t, X, Y).

    The self-adjoint variable is eta(xi) = y(xi)/xi with xi = x, which
    is the composition of z(x) = x y(1/x) with eta(xi) = z(1/xi).
    """
    xi = np.asarray(xi, dtype=float)
    y = np.asarray(y, dtype=float)
    dy = np.asarray(dy, dtype=float)
    eta = y / xi
    deta = dy / xi - y / xi**2
    n, lam = float(sys.n), float(sys.lam)
    X = xi * deta / eta
    Y = xi ** (lam - 1) * eta**n / deta
    return np.log(xi), X, Y, eta, deta
