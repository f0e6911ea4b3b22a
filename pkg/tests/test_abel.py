import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamptf.abel import (
    Verdict,
    abel_coefficients,
    abel_invariant,
    abel_second_kind_rhs,
    check_integrability,
    cleared_condition,
    family_invariant,
    integrability_alpha,
    inverse_lampariello_transform,
    lampariello_transform,
    majorana_consistency,
    majorana_rhs,
    scale_invariant_equation,
    tau_uniform_samples,
)
from lamptf.bvp import ratio_state
from lamptf.errors import ExcludedPointError, ParameterError, SingularityError

TF_ROOT = (5 / 81) ** 2


class TestSecondKind:
    def test_f3_vanishes_at_one(self):
        assert abel_second_kind_rhs(1, 1.0, 1.0) == 7

    def test_quarter(self):
        assert abel_second_kind_rhs(1, 0.25, 1.0) == pytest.approx(5.5, abs=1e-14)

    @pytest.mark.parametrize("p", [0.5, 1, 2, 7])
    def test_origin(self, p):
        assert abel_second_kind_rhs(p, 0.0, -2.3) == pytest.approx(3 + 4 / p, rel=1e-15)

    def test_singular_s(self):
        with pytest.raises(SingularityError):
            abel_second_kind_rhs(1, 0.5, 0.0)


class TestCoefficients:
    @pytest.mark.parametrize(
        "p, f2, amp, pw",
        [(1, -7, 12, 1.5), (2, -5, 6, 5 / 3), (math.inf, -3, 2, 2)],
    )
    def test_values(self, p, f2, amp, pw):
        form = abel_coefficients(p)
        assert form.f2 == pytest.approx(f2, rel=1e-15)
        assert form.f3_amp == pytest.approx(amp, rel=1e-15)
        assert form.f3_pow == pytest.approx(pw, rel=1e-15)

    @given(st.floats(min_value=0.01, max_value=1e3))
    def test_f3_root_and_f2_sign(self, p):
        form = abel_coefficients(p)
        assert form.f3(1.0) == 0
        assert form.f2 < 0

    def test_rejects_non_positive(self):
        with pytest.raises(ParameterError):
            abel_coefficients(0)


class TestInvariant:
    def test_tf_values(self):
        assert abel_invariant(1, 0.0) == pytest.approx(70 / 27, rel=1e-15)
        assert abel_invariant(1, 1.0) == pytest.approx(-1064 / 27, rel=1e-14)
        assert abel_invariant(1, TF_ROOT) == pytest.approx(0.0, abs=1e-14)
        assert family_invariant(1).root == pytest.approx(TF_ROOT, rel=1e-14)

    def test_tf_closed_form_on_grid(self):
        w = np.linspace(0, 1, 50)
        assert np.max(np.abs(abel_invariant(1, w) - (70 / 27 - 42 * np.sqrt(w)))) < 1e-14

    @pytest.mark.parametrize("p", [0.5, 1, 2, 5])
    def test_matches_defining_combination(self, p):
        w = np.linspace(0.02, 1, 50)
        form = abel_coefficients(p)
        combo = -form.f2 * form.df3(w) / 3 + 2 * form.f2**3 / 27
        phi = abel_invariant(p, w)
        assert np.all(np.abs(phi - combo) < 1e-12 * (1 + np.abs(phi)))
        assert np.allclose(form.equation().invariant(w), phi, rtol=1e-12, atol=1e-12)

    def test_rejects_negative_w(self):
        with pytest.raises(ValueError):
            abel_invariant(1, -0.1)


class TestAlpha:
    def test_spread_witness(self):
        assert abs(integrability_alpha(1, 0.01) - integrability_alpha(1, 0.25)) > 0.1

    def test_excluded_at_root(self):
        with pytest.raises(ExcludedPointError):
            abel_coefficients(1).equation().alpha(0.5, 0.0)

    def test_tf_condition_constants(self):
        # 195 - 3807 sqrt(w) - 11664 w = 14^(2/3) (5 - 81 sqrt(w))^(5/3) alpha
        for w in (0.01, 0.2, 0.6):
            a = integrability_alpha(1, w)
            left = 195 - 3807 * math.sqrt(w) - 11664 * w
            x = 5 - 81 * math.sqrt(w)
            right = 14 ** (2 / 3) * math.copysign(abs(x) ** (5 / 3), x) * a
            assert left == pytest.approx(right, rel=1e-12)


class TestClearedCondition:
    def test_tf_constants_exact(self):
        c = cleared_condition(1)
        assert (c.c1, c.c2, c.c6) == (3807, 11664, 195)
        assert c.radicand == 14
        assert c.root_form == (5, 81)
        assert c.q == Fraction(1, 2)

    def test_rejects_non_positive(self):
        with pytest.raises(ParameterError):
            cleared_condition(0)


class TestCheckIntegrability:
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_family_non_integrable(self, p):
        report = check_integrability(p, np.linspace(0.05, 0.95, 10))
        assert report.verdict is Verdict.NON_INTEGRABLE
        assert len(report.samples) == 10

    def test_tf_spread_robust(self):
        assert check_integrability(1).alpha_spread > 0.1

    @pytest.mark.parametrize("a, k", [(2.0, 0.5), (-1.5, 1.0), (3.0, 2.0)])
    def test_positive_control(self, a, k):
        eq = scale_invariant_equation(a, k)
        report = check_integrability(equation=eq)
        assert report.verdict is Verdict.INTEGRABLE
        C = -a * (k + 1) / 3 + 2 * a**3 / 27
        # Phi = C w^(3k); the real-branch Phi^(5/3) leaves |C|^(2/3) in the denominator
        want = (a * a - 3 * k - 3) / (3 * abs(C) ** (2 / 3))
        alphas = np.array([al for _, al in report.samples])
        assert np.max(np.abs(alphas - want)) < 1e-10 * (1 + abs(want))

    def test_root_excluded(self):
        report = check_integrability(1, [TF_ROOT] + list(np.linspace(0.05, 0.95, 10)))
        assert report.excluded == [TF_ROOT]
        assert report.verdict is Verdict.NON_INTEGRABLE

    def test_all_excluded_is_indeterminate(self):
        report = check_integrability(1, [TF_ROOT] * 9)
        assert report.verdict is Verdict.INDETERMINATE
        assert math.isnan(report.alpha_spread)

    def test_needs_exactly_one_source(self):
        with pytest.raises(ValueError):
            check_integrability()
        with pytest.raises(ValueError):
            check_integrability(1, equation=scale_invariant_equation(1, 1))


class TestLamparielloTransform:
    def test_zero_u_at_one(self):
        assert lampariello_transform(1, 1.0, 3.0) == (1.0, 0.0)

    def test_unit_u_when_s_zero(self):
        assert lampariello_transform(1, 1.0, 0.0) == (1.0, 1.0)

    @given(
        st.sampled_from([0.5, 1, 2, 5]),
        st.floats(min_value=1e-3, max_value=2),
        st.floats(min_value=-10, max_value=10),
    )
    def test_round_trip(self, p, w, s):
        w2, s2 = inverse_lampariello_transform(p, *lampariello_transform(p, w, s))
        assert w2 == pytest.approx(w, rel=1e-12)
        assert s2 == pytest.approx(s, rel=1e-12, abs=1e-12 * (1 + abs(w)))

    def test_rejects_non_positive_w(self):
        with pytest.raises(ValueError):
            lampariello_transform(1, 0.0, 1.0)


class TestMajorana:
    @pytest.mark.parametrize("u", [-3.0, 0.0, 2.5])
    def test_origin(self, u):
        assert majorana_rhs(1, 0.0, u) == -8

    def test_half(self):
        assert majorana_rhs(1, 0.5, 1.0) == pytest.approx(-16 / 3, rel=1e-15)

    def test_singular_locus(self):
        with pytest.raises(SingularityError, match="tau=1"):
            majorana_rhs(1, 1.0, 1.0)

    def test_bvp_trajectory_consistent(self, tf_solution):
        w, s = tau_uniform_samples(1, lambda x: ratio_state(tf_solution, x), 0.5, 20.0, 201)
        assert majorana_consistency(1, w, s) < 1e-4

    def test_constant_trajectory_rejected(self):
        with pytest.raises(ValueError):
            majorana_consistency(1, np.ones(20), np.zeros(20))

    def test_violating_trajectory_flagged(self):
        w = np.linspace(0.1, 0.9, 101)
        assert majorana_consistency(1, w, w) > 0.1
