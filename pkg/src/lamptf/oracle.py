"""Brute-force reference for the critical slope.

Deliberately shares nothing with ``integrate`` or ``bvp``: a fixed-step
classical RK4 in a variable that removes the singularity at the origin,
plus plain bisection. Slow, but easy to audit.
"""

import math


__all__ = ["rk4_shot", "rk4_critical_slope"]


def rk4_shot(B, x_max=100.0, ds=1e-3, p=1):
    """Classify a shot of y'' = x^(-q) y^(1+q) by fixed-step RK4 in s = x^(1/(p+1)).

    With x = s^(p+1) and u = dy/dx the system becomes
        dy/ds = (p+1) s^p u,   du/ds = (p+1) y^(1+q)
    which is smooth at s = 0, so no series start is needed. ``p`` must be a
    positive integer. Returns (kind, x_mark) with kind in
    {"Undershoot", "Overshoot", "Monotone"}.
    """
    m = p + 1
    e = 1 + p / (p + 1)

    def f(s, y, u):
        return m * s**p * u, m * max(y, 0.0) ** e

    s_max = x_max ** (1 / m)
    n = int(math.ceil(s_max / ds))
    h = s_max / n
    s, y, u = 0.0, 1.0, float(B)
    for _ in range(n):
        k1 = f(s, y, u)
        k2 = f(s + h / 2, y + h / 2 * k1[0], u + h / 2 * k1[1])
        k3 = f(s + h / 2, y + h / 2 * k2[0], u + h / 2 * k2[1])
        k4 = f(s + h, y + h * k3[0], u + h * k3[1])
        y_new = y + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        u_new = u + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        s += h
        if y_new <= 0:
            return "Undershoot", s**m
        if u_new >= 0:
            return "Overshoot", s**m
        y, u = y_new, u_new
    return "Monotone", x_max


def rk4_critical_slope(lo=-2.0, hi=-1.0, tol=1e-9, x_max=100.0, ds=1e-3, p=1):
    """Bisection on the RK4 shot classification."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        kind, _ = rk4_shot(mid, x_max, ds, p)
        if kind == "Undershoot":
            lo = mid
        elif kind == "Overshoot":
            hi = mid
        else:
            break
    return 0.5 * (lo + hi)
