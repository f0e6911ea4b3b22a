"""Abel-equation reduction of the ratio oscillator and its integrability test.

With s = dw/dt the oscillator becomes an Abel equation of the second kind
in s(w); z = 1/s turns it into the first-kind equation
dz/dw = f2 z^2 + f3 z^3. Integrability by quadrature requires the
invariant Phi to satisfy f3 Phi' + (f2^2 - 3 f3') Phi = 3 alpha Phi^(5/3)
for a constant alpha; here alpha(w) is sampled pointwise and its spread
decides the verdict.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import ExcludedPointError, ParameterError, SingularityError

__all__ = [
    "AbelForm",
    "AbelEquation",
    "AbelInvariant",
    "Verdict",
    "IntegrabilityReport",
    "ClearedCondition",
    "abel_second_kind_rhs",
    "abel_coefficients",
    "family_invariant",
    "abel_invariant",
    "integrability_alpha",
    "check_integrability",
    "cleared_condition",
    "lampariello_transform",
    "inverse_lampariello_transform",
    "majorana_rhs",
    "majorana_consistency",
    "tau_uniform_samples",
]

INTEGRABLE_TOL = 1e-8
LOCUS_TOL = 1e-12
ROOT_EXCLUSION = 1e-3
MIN_VALID = 8


def _is_inf(p) -> bool:
    return isinstance(p, float) and math.isinf(p)


def _check(p):
    if not p > 0:
        raise ParameterError(f"p must be positive, got {p!r}")


def real_cbrt_pow(x, num: int):
    """x^(num/3) on the real branch: sign(x) |x|^(num/3) for odd num."""
    return np.sign(x) * np.abs(x) ** (num / 3)


@dataclass(frozen=True)
class AbelForm:
    """f2 = const, f3(w) = f3_amp (w - w^f3_pow)."""

    p: float
    f2: float
    f3_amp: float
    f3_pow: float

    def f3(self, w):
        return self.f3_amp * (w - w**self.f3_pow)

    def df3(self, w):
        return self.f3_amp * (1 - self.f3_pow * w ** (self.f3_pow - 1))

    def d2f3(self, w):
        k = self.f3_pow
        return -self.f3_amp * k * (k - 1) * w ** (k - 2)

    def equation(self) -> "AbelEquation":
        f2 = self.f2
        return AbelEquation(
            f2=lambda w: f2 + 0 * w,
            df2=lambda w: 0 * w,
            d2f2=lambda w: 0 * w,
            f3=self.f3,
            df3=self.df3,
            d2f3=self.d2f3,
        )


def abel_coefficients(p) -> AbelForm:
    _check(p)
    if _is_inf(p):
        return AbelForm(p=p, f2=-3.0, f3_amp=2.0, f3_pow=2.0)
    return AbelForm(
        p=p,
        f2=-(3 + 4 / p),
        f3_amp=2 * (1 + 1 / p) * (1 + 2 / p),
        f3_pow=2 - 1 / (p + 1),
    )


def abel_second_kind_rhs(p, w, s):
    """ds/dw from s s' - (3 + 4/p) s + f3_amp (w - w^f3_pow) = 0."""
    if s == 0:
        raise SingularityError("s = 0 is a singular point of the second-kind equation")
    form = abel_coefficients(p)
    return -form.f2 - form.f3(w) / s


@dataclass(frozen=True)
class AbelEquation:
    """First-kind Abel equation z' = f2(w) z^2 + f3(w) z^3 with derivatives."""

    f2: Callable
    df2: Callable
    d2f2: Callable
    f3: Callable
    df3: Callable
    d2f3: Callable

    def invariant(self, w):
        f2, f3 = self.f2(w), self.f3(w)
        return (f3 * self.df2(w) - f2 * self.df3(w)) / 3 + 2 * f2**3 / 27

    def d_invariant(self, w):
        f2, f3 = self.f2(w), self.f3(w)
        df2 = self.df2(w)
        return (f3 * self.d2f2(w) - f2 * self.d2f3(w)) / 3 + 2 * f2**2 * df2 / 9

    def condition_lhs(self, w, phi=None, dphi=None):
        phi = self.invariant(w) if phi is None else phi
        dphi = self.d_invariant(w) if dphi is None else dphi
        return self.f3(w) * dphi + (self.f2(w) ** 2 - 3 * self.df3(w)) * phi

    def alpha(self, w, phi=None, dphi=None):
        phi = self.invariant(w) if phi is None else phi
        if np.any(phi == 0):
            raise ExcludedPointError(f"invariant vanishes at w={w!r}")
        return self.condition_lhs(w, phi, dphi) / (3 * real_cbrt_pow(phi, 5))


@dataclass(frozen=True)
class AbelInvariant:
    """Phi_p(w) = A_p + B_p w^pow."""

    p: float
    A_p: float
    B_p: float
    pow: float

    def __call__(self, w):
        return self.A_p + self.B_p * w**self.pow

    def derivative(self, w):
        return self.B_p * self.pow * w ** (self.pow - 1)

    @property
    def root(self) -> Optional[float]:
        """The w > 0 where Phi_p vanishes, if any."""
        r = -self.A_p / self.B_p if self.B_p else -1.0
        return r ** (1 / self.pow) if r > 0 else None


def family_invariant(p) -> AbelInvariant:
    _check(p)
    if _is_inf(p):
        return AbelInvariant(p=p, A_p=0.0, B_p=-4.0, pow=1.0)
    scale = 2 * (3 * p + 4) / (27 * p**3)
    return AbelInvariant(
        p=p,
        A_p=scale * (3 * p + 2),
        B_p=-scale * 9 * (p + 2) * (2 * p + 1),
        pow=1 - 1 / (p + 1),
    )


def abel_invariant(p, w) -> float:
    if np.any(np.asarray(w) < 0):
        raise ValueError("w must be non-negative")
    return family_invariant(p)(w)


def integrability_alpha(p, w):
    """alpha(w) for the family member p, using the closed-form invariant."""
    if np.any(np.asarray(w) <= 0):
        raise ValueError("w must be positive")
    inv = family_invariant(p)
    return abel_coefficients(p).equation().alpha(w, inv(w), inv.derivative(w))


class Verdict(enum.Enum):
    INTEGRABLE = "Integrable"
    NON_INTEGRABLE = "NonIntegrable"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class IntegrabilityReport:
    p: Optional[float]
    samples: list
    alpha_spread: float
    verdict: Verdict
    excluded: list = field(default_factory=list)
    region_spreads: dict = field(default_factory=dict)
    tol: float = INTEGRABLE_TOL


def default_grid(n=10) -> np.ndarray:
    return np.linspace(0.05, 0.95, n)


def check_integrability(
    p=None,
    w_grid: Optional[Sequence[float]] = None,
    tol: float = INTEGRABLE_TOL,
    equation: Optional[AbelEquation] = None,
) -> IntegrabilityReport:
    """Sample alpha(w) on ``w_grid`` and decide whether it is constant.

    Either a family parameter ``p`` or an explicit ``equation`` is given.
    Grid points within relative distance 1e-3 of a root of the invariant
    (or where it is exactly zero) are excluded.
    """
    if (p is None) == (equation is None):
        raise ValueError("give exactly one of p and equation")
    grid = default_grid() if w_grid is None else np.asarray(w_grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("grid points must be positive")

    if equation is None:
        inv = family_invariant(p)
        eq = abel_coefficients(p).equation()
        root = inv.root
        phi_fn, dphi_fn = inv, inv.derivative
    else:
        eq, root = equation, None
        phi_fn, dphi_fn = eq.invariant, eq.d_invariant

    samples, excluded = [], []
    for w in grid:
        phi = float(phi_fn(w))
        if phi == 0 or (root is not None and abs(w - root) <= ROOT_EXCLUSION * root):
            excluded.append(float(w))
            continue
        samples.append((float(w), float(eq.alpha(w, phi, float(dphi_fn(w))))))

    if len(samples) < MIN_VALID:
        return IntegrabilityReport(p, samples, math.nan, Verdict.INDETERMINATE, excluded, {}, tol)

    alphas = np.array([a for _, a in samples])
    spread = float(alphas.max() - alphas.min())
    regions = {}
    phis = np.array([float(phi_fn(w)) for w, _ in samples])
    for name, mask in (("positive", phis > 0), ("negative", phis < 0)):
        if mask.sum() >= 2:
            regions[name] = float(alphas[mask].max() - alphas[mask].min())
    verdict = Verdict.INTEGRABLE if spread < tol else Verdict.NON_INTEGRABLE
    return IntegrabilityReport(p, samples, spread, verdict, excluded, regions, tol)


def scale_invariant_equation(a: float, k: float) -> AbelEquation:
    """Integrable control case f2 = a w^k, f3 = w^(2k+1).

    Its invariant is a single power C w^(3k) and alpha is the constant
    (a^2 - 3k - 3) / (3 C^(2/3)).
    """
    m = 2 * k + 1
    return AbelEquation(
        f2=lambda w: a * w**k,
        df2=lambda w: a * k * w ** (k - 1),
        d2f2=lambda w: a * k * (k - 1) * w ** (k - 2),
        f3=lambda w: w**m,
        df3=lambda w: m * w ** (m - 1),
        d2f3=lambda w: m * (m - 1) * w ** (m - 2),
    )


@dataclass(frozen=True)
class ClearedCondition:
    """c1 w^q + c2 w^(2q) + R^(2/3) (m - k w^q)^(5/3) alpha = c6.

    All coefficients are exact rationals; ``radicand`` is the cube-free
    integer R.
    """

    q: Fraction
    c1: Fraction
    c2: Fraction
    c6: Fraction
    radicand: int
    root_form: tuple[int, int]
    clearing_factor: Fraction
    lhs: tuple[Fraction, Fraction, Fraction]


def _cube_split(n: int) -> tuple[int, int]:
    """n = c^3 * r with r cube-free."""
    c, r, d = 1, n, 2
    while d * d * d <= r:
        while r % (d * d * d) == 0:
            r //= d * d * d
            c *= d
        d += 1
    return c, r


def cleared_condition(p) -> ClearedCondition:
    """Exact integrability condition for rational p with denominators cleared.

    Writes f3 Phi' + (f2^2 - 3 f3') Phi = L0 + L1 w^q + L2 w^(2q) and
    Phi = g (m - k w^q), then multiplies through by the factor that turns
    3 g^(5/3) into R^(2/3).
    """
    p = Fraction(p)
    if p <= 0:
        raise ParameterError("p must be positive")
    q = p / (p + 1)
    f2 = -(3 + 4 / p)
    kappa = 2 * (1 + 1 / p) * (1 + 2 / p)
    A = -f2 * kappa / 3 + Fraction(2, 27) * f2**3
    B = f2 * kappa * (1 + q) / 3
    c = f2**2 - 3 * kappa
    L0 = c * A
    L1 = kappa * B * q + c * B + 3 * kappa * (1 + q) * A
    L2 = -kappa * B * q + 3 * kappa * (1 + q) * B

    ratio = A / -B
    m, k = ratio.numerator, ratio.denominator
    g = A / m
    a, b = g.numerator, g.denominator
    cube, radicand = _cube_split(a * b * b)
    factor = Fraction(b**3, 3 * a * cube**2)
    return ClearedCondition(
        q=q,
        c1=-factor * L1,
        c2=-factor * L2,
        c6=factor * L0,
        radicand=radicand,
        root_form=(m, k),
        clearing_factor=factor,
        lhs=(L0, L1, L2),
    )


def lampariello_transform(p, w, s):
    """(w, s) -> (tau, u) with w = tau^((p+1)(p+2)) and
    s = (1 + 2/p) (1 - tau^(p(p+1)) u) w."""
    _check(p)
    if w <= 0:
        raise ValueError("w must be positive")
    tau = w ** (1 / ((p + 1) * (p + 2)))
    u = tau ** (-p * (p + 1)) * (1 - s / ((1 + 2 / p) * w))
    return tau, u


def inverse_lampariello_transform(p, tau, u):
    _check(p)
    w = tau ** ((p + 1) * (p + 2))
    s = (1 + 2 / p) * (1 - tau ** (p * (p + 1)) * u) * w
    return w, s


def majorana_rhs(p, tau, u):
    """du/dtau = -2 (p+1)^2 tau^(p-1) (1 - tau^(p^2) u^2) / (1 - tau^(p(p+1)) u)."""
    _check(p)
    if tau < 0:
        raise ValueError("tau must be non-negative")
    den = 1 - tau ** (p * (p + 1)) * u
    if abs(den) <= LOCUS_TOL:
        raise SingularityError(f"singular locus at tau={tau!r}, u={u!r}")
    return -2 * (p + 1) ** 2 * tau ** (p - 1) * (1 - tau ** (p * p) * u * u) / den


def _central_diff4(u, h):
    return (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * h)


def majorana_consistency(p, w, s, locus_tol=1e-2) -> float:
    """Max |du/dtau - majorana_rhs| along a sampled (w, s) trajectory.

    Samples are mapped to (tau, u); unless tau is already uniform the
    curve is resampled on a uniform tau grid with a cubic spline. u' comes
    from 4th-order central differences. Points with
    |1 - tau^(p(p+1)) u| < ``locus_tol`` are skipped.
    """
    w = np.asarray(w, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(w <= 0):
        raise ValueError("w must be positive")
    tau = w ** (1 / ((p + 1) * (p + 2)))
    u = tau ** (-p * (p + 1)) * (1 - s / ((1 + 2 / p) * w))
    den = 1 - tau ** (p * (p + 1)) * u
    usable = np.abs(den) >= locus_tol
    if usable.sum() < 5:
        raise ValueError("fewer than 5 samples away from the singular locus")
    dtau = np.diff(tau)
    if not (np.all(dtau > 0) or np.all(dtau < 0)):
        raise ValueError("tau must be strictly monotone along the trajectory")
    order = np.argsort(tau)
    tau, u, usable = tau[order], u[order], usable[order]
    h = (tau[-1] - tau[0]) / (len(tau) - 1)
    if not np.allclose(np.diff(tau), h, rtol=1e-9, atol=0):
        grid = np.linspace(tau[0], tau[-1], len(tau))
        u = CubicSpline(tau, u)(grid)
        usable = np.interp(grid, tau, usable.astype(float)) == 1.0
        tau = grid
    du = _central_diff4(u, h)
    t_in, u_in, ok = tau[2:-2], u[2:-2], usable[2:-2]
    if ok.sum() < 1:
        raise ValueError("no interior samples away from the singular locus")
    rhs = np.array([majorana_rhs(p, t, v) for t, v in zip(t_in[ok], u_in[ok])])
    return float(np.max(np.abs(du[ok] - rhs)))


def tau_uniform_samples(p, ratio_state: Callable, x_lo: float, x_hi: float, n: int = 201):
    """Sample a (w, s) trajectory at equally spaced tau = w^(1/((p+1)(p+2))).

    ``ratio_state(x)`` returns (w, s) along a solution on which w increases
    with x. Each tau node is located by root finding in x, so no
    interpolation in tau is involved.
    """
    if not 0 < x_lo < x_hi:
        raise ValueError("need 0 < x_lo < x_hi")
    e = 1 / ((p + 1) * (p + 2))

    def tau(x):
        return float(ratio_state(x)[0]) ** e

    t_lo, t_hi = tau(x_lo), tau(x_hi)
    if not t_hi > t_lo:
        raise ValueError("w must increase over [x_lo, x_hi]")
    xs = [x_lo]
    for t in np.linspace(t_lo, t_hi, n)[1:-1]:
        xs.append(brentq(lambda x: tau(x) - t, x_lo, x_hi, xtol=1e-15, rtol=1e-15))
    xs.append(x_hi)
    w, s = ratio_state(np.array(xs))
    return np.asarray(w, dtype=float), np.asarray(s, dtype=float)
