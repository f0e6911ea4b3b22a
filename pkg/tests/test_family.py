import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamptf.errors import (
    DegenerateParameterError,
    DomainError,
    ParameterError,
    SingularityError,
    UndefinedExponentError,
)
from lamptf.family import (
    canonical_transform,
    cauchy_euler_exponents,
    ef_rhs,
    family_params,
    oscillator_coefficients,
    oscillator_rhs,
    particular_solution,
    perturbation_expansion,
    self_adjoint_residual,
)

positive_p = st.floats(min_value=0.05, max_value=50, allow_nan=False)


class TestFamilyParams:
    def test_thomas_fermi_exact(self):
        fp = family_params(1)
        assert (fp.n, fp.lam, fp.q) == (Fraction(3, 2), 2, Fraction(1, 2))
        assert not fp.extended

    def test_lane_emden_member_is_extended(self):
        fp = family_params(Fraction(-3, 2))
        assert fp.n == 4
        assert fp.extended

    def test_infinite_limit(self):
        fp = family_params(math.inf)
        assert (fp.n, fp.lam, fp.q) == (2, 3, 1)
        assert fp.is_limit

    def test_zero_and_minus_one_rejected_distinctly(self):
        with pytest.raises(DegenerateParameterError):
            family_params(0)
        with pytest.raises(UndefinedExponentError):
            family_params(-1)

    def test_nan_rejected(self):
        with pytest.raises(ParameterError):
            family_params(math.nan)

    @given(positive_p)
    def test_maps_are_consistent(self, p):
        fp = family_params(p)
        assert fp.n == pytest.approx(1 + fp.q)
        assert fp.lam == pytest.approx(2 * fp.n - 1)


class TestParticularSolution:
    def test_thomas_fermi(self):
        y0 = particular_solution(1)
        assert (y0.k_p, y0.exponent) == (144, 3)
        r = oscillator_coefficients(1)
        assert (r.r1 * r.r2) ** 2 == y0.k_p

    def test_p2(self):
        y0 = particular_solution(2)
        assert y0.k_p == pytest.approx(6**1.5, rel=1e-14)
        assert y0.exponent == 2

    @pytest.mark.parametrize("p", [0, -0.5, -2])
    def test_non_positive_rejected(self, p):
        with pytest.raises(ParameterError):
            particular_solution(p)

    @settings(max_examples=50)
    @given(positive_p, st.floats(min_value=0.1, max_value=100))
    def test_solves_the_equation(self, p, x):
        y0 = particular_solution(p)
        lhs = y0.derivative(x, 2)
        rhs = ef_rhs(family_params(p), x, y0(x))
        assert lhs == pytest.approx(rhs, rel=1e-10)


class TestEfRhs:
    @pytest.mark.parametrize("x, y, want", [(1, 1, 1), (4, 1, 0.5), (1, 4, 8)])
    def test_values(self, x, y, want):
        assert ef_rhs(family_params(1), x, y) == want

    def test_domain(self):
        with pytest.raises(SingularityError):
            ef_rhs(family_params(1), 0.0, 1.0)
        with pytest.raises(DomainError):
            ef_rhs(family_params(1), 1.0, -1.0)


class TestOscillator:
    def test_p1(self):
        c = oscillator_coefficients(1)
        assert c.zeta == pytest.approx(-7 * math.sqrt(3) / 12, abs=1e-14)
        assert (c.kappa, c.r1, c.r2) == (12, 4, 3)

    def test_limit(self):
        c = oscillator_coefficients(math.inf)
        assert c.zeta == pytest.approx(-3 * math.sqrt(2) / 4, abs=1e-14)
        assert c.kappa == 2

    @given(positive_p)
    def test_equilibrium_at_one(self, p):
        assert oscillator_rhs(p, 1.0, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_values(self):
        assert oscillator_rhs(1, 0.0, 1.0) == 7
        assert oscillator_rhs(1, 4.0, 0.0) == 48

    def test_negative_w(self):
        with pytest.raises(DomainError):
            oscillator_rhs(1, -0.1, 0.0)

    def test_large_p_approaches_limit(self):
        big = oscillator_coefficients(1e8)
        lim = oscillator_coefficients(math.inf)
        assert big.kappa == pytest.approx(lim.kappa, rel=1e-6)
        assert big.zeta == pytest.approx(lim.zeta, rel=1e-6)


class TestCanonicalTransform:
    def test_identity_image(self):
        x = np.linspace(0.5, 3, 20)
        u, y = canonical_transform(x, x)
        assert np.allclose(y, 1.0, rtol=1e-15)
        assert np.all(np.diff(u) > 0)

    def test_particular_solution_image(self):
        x = np.geomspace(0.1, 10, 50)
        y0 = particular_solution(1)
        z = x * y0(1 / x)
        assert np.allclose(z, 144 * x**4, rtol=1e-14)
        u, y = canonical_transform(x, z)
        assert np.allclose(y, y0(u), rtol=1e-14)

    @given(st.lists(st.floats(min_value=0.01, max_value=100), min_size=3, max_size=30, unique=True))
    def test_involution(self, xs):
        x = np.sort(np.array(xs))
        z = np.exp(-x) + x**2
        u, y = canonical_transform(x, z)
        x2, z2 = canonical_transform(u, y)
        assert np.allclose(x2, x, rtol=1e-12)
        assert np.allclose(z2, z, rtol=1e-10)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            canonical_transform(np.array([0.0, 1.0]), np.array([1.0, 1.0]))


class TestSelfAdjointResidual:
    def test_constant_eta(self):
        xi = np.linspace(1, 2, 11)
        eta = np.full_like(xi, 0.7)
        r = self_adjoint_residual(family_params(1), xi, eta, np.zeros_like(xi))
        assert r == pytest.approx(0.7**1.5, rel=1e-14)

    def test_zero(self):
        xi = np.linspace(1, 2, 11)
        assert self_adjoint_residual(family_params(1), xi, 0 * xi, 0 * xi) == 0

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            self_adjoint_residual(family_params(1), np.ones(2), np.ones(2), np.ones(2))

    def test_transformed_tf_solution(self, tf_solution):
        # eta(xi) = y(xi)/xi: reflecting y gives u * y(1/u) at u = 1/xi
        xi = np.geomspace(0.5, 10, 50001)
        y, dy = tf_solution.curve(xi).T
        u, v = canonical_transform(xi, y)
        eta = y / xi
        assert np.allclose(u[::-1], 1 / xi, rtol=1e-15)
        assert np.allclose(v[::-1], eta, rtol=1e-15)
        deta = dy / xi - y / xi**2
        assert self_adjoint_residual(family_params(1), xi, eta, deta) < 1e-6


class TestPerturbation:
    def test_p1(self):
        pe = perturbation_expansion(1)
        assert pe.c_lin == 18
        lo, hi = pe.exponents
        assert lo == pytest.approx((1 - math.sqrt(73)) / 2, abs=1e-12)
        assert hi == pytest.approx((1 + math.sqrt(73)) / 2, abs=1e-12)
        assert pe.c_quad == pytest.approx(1 / 32, rel=1e-14)
        assert pe.pow_quad == 1
        assert pe.c_cub == pytest.approx(1 / 27648, rel=1e-14)
        assert pe.pow_cub == 4

    @given(st.floats(min_value=0, max_value=1e3))
    def test_cauchy_euler_roots(self, c):
        for r in cauchy_euler_exponents(c):
            assert r * (r - 1) == pytest.approx(c, rel=1e-10, abs=1e-12)

    @settings(max_examples=30)
    @given(positive_p)
    def test_series_matches_exact_equation(self, p):
        # eps'' from the expansion agrees with the exact nonlinear equation to O(eps^4)
        pe = perturbation_expansion(p)
        y0 = particular_solution(p)
        x, rel = 2.0, 1e-3
        eps = rel * y0(x)
        exact = ef_rhs(family_params(p), x, y0(x) + eps) - ef_rhs(family_params(p), x, y0(x))
        assert pe.rhs(x, eps) == pytest.approx(exact, rel=1e-8)
