"""Closed-form quantities of the Lampariello family y'' = x^(-q) y^(1+q).

The family is indexed by a single real p with q = p/(p+1); p = 1 is the
Thomas-Fermi equation. ``math.inf`` is accepted wherever the limit p -> oo
is meaningful and is evaluated through the exact limiting formulas rather
than by substituting a large float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import (
    DegenerateParameterError,
    DomainError,
    ParameterError,
    SingularityError,
    UndefinedExponentError,
)

__all__ = [
    "FamilyParams",
    "ParticularSolution",
    "OscillatorCoefficients",
    "PerturbationExpansion",
    "family_params",
    "particular_solution",
    "ef_rhs",
    "oscillator_coefficients",
    "oscillator_rhs",
    "canonical_transform",
    "self_adjoint_residual",
    "perturbation_expansion",
]


def _is_inf(p) -> bool:
    return isinstance(p, float) and math.isinf(p) and p > 0


def _check_p(p):
    if isinstance(p, float) and math.isnan(p):
        raise ParameterError("p is NaN")
    if p == 0:
        raise DegenerateParameterError("p = 0 gives a linear equation")
    if p == -1:
        raise UndefinedExponentError("p = -1 leaves n and lambda undefined")


def _require_positive(p):
    _check_p(p)
    if not p > 0:
        raise ParameterError(f"p must be positive here, got {p!r}")


@dataclass(frozen=True)
class FamilyParams:
    """Position of one family member in Emden-Fowler exponent space.

    ``n`` and ``lam`` follow the standard parameter map
    n = 2 - 1/(p+1), lambda = 3 - 2/(p+1). ``sa_lambda`` is the exponent of
    the self-adjoint form that z(x) = x y(1/x) actually produces from
    y'' = x^(-q) y^n; it is 2 for every p and agrees with ``lam`` only at
    p = 1.
    """

    p: Real
    n: Real
    lam: Real
    q: Real
    extended: bool = False

    def __post_init__(self):
        _check_p(self.p)
        if self.p < -1 and not self.extended:
            raise ParameterError("p < -1 is only available as an extended parameter map")

    @property
    def is_limit(self) -> bool:
        return _is_inf(self.p)

    @property
    def sa_lambda(self) -> Real:
        return 2


def family_params(p) -> FamilyParams:
    """Exponent maps for the member with Lampariello parameter ``p``.

    Rational input (``int`` or ``Fraction``) keeps the maps exact. Values
    of p below -1 are accepted with ``extended=True``; the Lane-Emden
    members with integer n live in (-2, -1).
    """
    _check_p(p)
    if _is_inf(p):
        return FamilyParams(p=p, n=2.0, lam=3.0, q=1.0)
    if isinstance(p, int):
        p = Fraction(p)
    inv = 1 / (p + 1)
    n = 2 - inv
    lam = 3 - 2 * inv
    q = p * inv
    return FamilyParams(p=p, n=n, lam=lam, q=q, extended=bool(p < -1))


@dataclass(frozen=True)
class ParticularSolution:
    """The power-law solution y0(x) = k_p x^(-exponent)."""

    p: float
    k_p: float
    exponent: float

    def __call__(self, x):
        return self.k_p * np.power(x, -self.exponent)

    def derivative(self, x, order: int = 1):
        c = self.k_p
        e = -self.exponent
        for _ in range(order):
            c *= e
            e -= 1
        return c * np.power(x, e)


def _roots(p):
    if _is_inf(p):
        return 2.0, 1.0
    return 2 + 2 / p, 1 + 2 / p


def particular_solution(p) -> ParticularSolution:
    _require_positive(p)
    r1, r2 = _roots(p)
    if _is_inf(p):
        return ParticularSolution(p=p, k_p=2.0, exponent=1.0)
    return ParticularSolution(p=p, k_p=float((r1 * r2) ** (1 + 1 / p)), exponent=float(r2))


def ef_rhs(params: FamilyParams, x, y):
    """Right-hand side x^(-q) y^(1+q) of the family equation."""
    if x <= 0:
        raise SingularityError(f"x must be positive, got {x!r}")
    if y < 0:
        raise DomainError(f"y must be non-negative, got {y!r}")
    q = float(params.q)
    return x ** (-q) * y ** (1 + q)


@dataclass(frozen=True)
class OscillatorCoefficients:
    """Coefficients of the ratio equation in t = ln x for w = y/y0.

    The linear part is w'' - (3 + 4/p) w' + kappa w with characteristic
    roots r1, r2; ``zeta`` is the normalized damping ratio.
    """

    p: float
    zeta: float
    kappa: float
    r1: float
    r2: float

    @property
    def damping(self) -> float:
        return self.r1 + self.r2


def oscillator_coefficients(p) -> OscillatorCoefficients:
    _require_positive(p)
    r1, r2 = _roots(p)
    kappa = float(r1 * r2)  # equals k_p^(1 - 1/(p+1))
    half = 1.5 if _is_inf(p) else 1.5 + 2 / p
    zeta = -half / math.sqrt(kappa)
    return OscillatorCoefficients(p=p, zeta=zeta, kappa=kappa, r1=float(r1), r2=float(r2))


def _power_n(p) -> float:
    return 2.0 if _is_inf(p) else 2 - 1 / (p + 1)


def oscillator_rhs(p, w, wdot):
    """Second derivative d^2w/dt^2 of the ratio w = y/y0 in t = ln x."""
    if w < 0:
        raise DomainError(f"w must be non-negative, got {w!r}")
    c = oscillator_coefficients(p)
    return c.damping * wdot - c.kappa * w + c.kappa * w ** _power_n(p)


def canonical_transform(x, z):
    """Map samples of z(x) to samples of y(u) with z(x) = x y(1/x).

    The relation is symmetric (y(u) = u z(1/u)), so the map is an
    involution. Returns ``(u, y)`` sorted by increasing ``u``.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape or x.ndim != 1:
        raise ValueError("x and z must be 1-d arrays of equal length")
    if np.any(x <= 0):
        raise ValueError("abscissae must be positive")
    dx = np.diff(x)
    if not (np.all(dx > 0) or np.all(dx < 0)):
        raise ValueError("abscissae must be strictly monotone")
    u = 1.0 / x
    y = z * u
    order = np.argsort(u)
    return u[order], y[order]


def self_adjoint_residual(params: FamilyParams, xi, eta, deta, lam=None) -> float:
    """Max of |(xi^2 eta')'/xi^2 - xi^(lam-2) eta^n| over the sample grid.

    ``eta''`` is obtained by second-order finite differences of ``deta``.
    ``lam`` defaults to ``params.sa_lambda``.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    deta = np.asarray(deta, dtype=float)
    if xi.size < 3:
        raise ValueError("need at least 3 samples")
    if np.any(xi <= 0):
        raise ValueError("xi must be positive")
    lam = float(params.sa_lambda if lam is None else lam)
    d2eta = np.gradient(deta, xi, edge_order=2)
    lhs = d2eta + 2 * deta / xi
    rhs = xi ** (lam - 2) * np.abs(eta) ** float(params.n) * np.sign(eta)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class PerturbationExpansion:
    """Series for eps = y - y0 about the particular solution.

    eps'' = c_lin eps / x^2 + c_quad x^pow_quad eps^2 - c_cub x^pow_cub eps^3
    with the cubic term entering negatively. ``exponents`` holds the
    negative and positive roots of r(r-1) = c_lin.
    """

    p: float
    c_lin: float
    exponents: tuple[float, float]
    c_quad: float
    pow_quad: float
    c_cub: float
    pow_cub: float

    def rhs(self, x, eps):
        return (
            self.c_lin * eps / x**2
            + self.c_quad * x**self.pow_quad * eps**2
            - self.c_cub * x**self.pow_cub * eps**3
        )


def cauchy_euler_exponents(c: float) -> tuple[float, float]:
    d = math.sqrt(1 + 4 * c)
    return (1 - d) / 2, (1 + d) / 2


def perturbation_expansion(p) -> PerturbationExpansion:
    _require_positive(p)
    k = particular_solution(p).k_p
    if _is_inf(p):
        c_lin, c_quad, c_cub = 2.0 * k, 1.0, 0.0
        pow_quad, pow_cub = -1.0, 0.0
    else:
        a = 1 / (p + 1)
        c_lin = (2 * p + 1) * a * k ** (p * a)
        c_quad = p * (2 * p + 1) / (2 * (p + 1) ** 2) * k ** (-a)
        c_cub = p * (2 * p + 1) / (6 * (p + 1) ** 3) * k ** (-(1 + a))
        pow_quad, pow_cub = 2 / p - 1, 4 / p
    return PerturbationExpansion(
        p=p,
        c_lin=float(c_lin),
        exponents=cauchy_euler_exponents(float(c_lin)),
        c_quad=float(c_quad),
        pow_quad=float(pow_quad),
        c_cub=float(c_cub),
        pow_cub=float(pow_cub),
    )

