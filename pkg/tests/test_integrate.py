import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamptf.errors import RhsDomainError
from lamptf.integrate import IVProblem, Status, dense_derivative, dense_eval, integrate_ivp


def exponential(rtol=1e-10, atol=1e-12, t_end=1.0):
    return integrate_ivp(IVProblem(lambda t, y: (y[0],), 0.0, (1.0,), t_end, rtol=rtol, atol=atol))


def harmonic(t_end=2 * math.pi, rtol=1e-10, atol=1e-12, events=()):
    prob = IVProblem(lambda t, s: (s[1], -s[0]), 0.0, (1.0, 0.0), t_end, rtol=rtol, atol=atol)
    return integrate_ivp(prob, events)


def test_exponential_endpoint():
    c = exponential()
    assert c.status is Status.COMPLETED
    assert c.t[-1] == 1.0
    assert abs(c.y[-1, 0] - math.e) < 1e-9


def test_harmonic_period():
    c = harmonic()
    assert np.max(np.abs(c.y[-1] - (1.0, 0.0))) < 1e-8
    energy = np.sum(c.y**2, axis=1)
    assert np.max(np.abs(energy - 1)) < 1e-8


def test_backward_integration():
    c = integrate_ivp(IVProblem(lambda t, y: (y[0],), 1.0, (math.e,), 0.0, rtol=1e-10, atol=1e-12))
    assert c.direction == -1.0
    assert abs(c.y[-1, 0] - 1.0) < 1e-9
    assert abs(c(0.5)[0] - math.exp(0.5)) < 1e-8


_HARMONIC = harmonic(rtol=1e-8, atol=1e-10)


class TestDenseOutput:
    def test_stored_samples_exact(self):
        c = harmonic()
        for i in (0, len(c) // 2, len(c) - 1):
            assert np.array_equal(dense_eval(c, c.t[i]), c.y[i])

    def test_exponential_mid_span(self):
        rtol = 1e-8
        c = exponential(rtol=rtol, atol=1e-12)
        t = np.linspace(0, 1, 101)
        assert np.max(np.abs(c(t)[:, 0] - np.exp(t)) / np.exp(t)) < 10 * rtol

    @given(st.floats(min_value=0.0, max_value=2 * math.pi))
    def test_harmonic_energy(self, t):
        rtol = 1e-8
        c = _HARMONIC
        y = dense_eval(c, t)
        assert abs(y @ y - 1) < 10 * rtol

    def test_derivative_of_interpolant(self):
        c = harmonic()
        t = np.linspace(0.1, 6, 37)
        d = dense_derivative(c, t)
        assert np.allclose(d[:, 0], -np.sin(t), atol=1e-7)
        assert np.allclose(d[:, 1], -np.cos(t), atol=1e-7)

    def test_scalar_and_array_shapes(self):
        c = harmonic()
        assert dense_eval(c, 1.0).shape == (2,)
        assert dense_eval(c, [1.0, 2.0]).shape == (2, 2)

    @pytest.mark.parametrize("t", [-0.1, 7.0])
    def test_out_of_span(self, t):
        with pytest.raises(ValueError):
            dense_eval(harmonic(), t)

    def test_arrays_read_only(self):
        c = harmonic()
        with pytest.raises(ValueError):
            c.y[0, 0] = 2.0


class TestEvents:
    def test_zero_crossing_located(self):
        c = harmonic(t_end=10.0, rtol=1e-12, atol=1e-14, events=[lambda t, s: s[0]])
        assert c.status is Status.EVENT_STOPPED
        ev = c.event
        assert ev.index == 0
        assert abs(ev.bracket[1] - ev.bracket[0]) <= 1e-12
        assert abs(ev.t_event - math.pi / 2) < 1e-9
        assert c.t[-1] == ev.t_event

    def test_first_of_several(self):
        c = harmonic(t_end=10.0, events=[lambda t, s: s[0], lambda t, s: s[0] - 0.5])
        assert c.event.index == 1
        assert c.event.t_event == pytest.approx(math.pi / 3, abs=1e-7)


class TestFailures:
    def test_divergence(self):
        c = integrate_ivp(IVProblem(lambda t, y: (y[0] ** 2,), 0.0, (1.0,), 2.0))
        assert c.status is Status.DIVERGED
        assert c.t[-1] == pytest.approx(1.0, abs=1e-6)

    def test_step_underflow(self):
        c = integrate_ivp(IVProblem(lambda t, y: (1 / (1 - t),), 0.0, (0.0,), 2.0))
        assert c.status is Status.STEP_UNDERFLOW
        assert c.t[-1] < 1.0

    def test_rhs_domain_error_carries_state(self):
        def rhs(t, y):
            if y[0] < 0.5:
                raise ValueError("below domain")
            return (-1.0,)

        with pytest.raises(RhsDomainError) as info:
            integrate_ivp(IVProblem(rhs, 0.0, (1.0,), 2.0))
        assert info.value.state[0] < 0.5
        assert 0.0 < info.value.t < 2.0

    @pytest.mark.parametrize(
        "kwargs",
        [dict(rtol=0.0), dict(atol=-1.0), dict(t_end=0.0), dict(max_step=0.0)],
    )
    def test_problem_validation(self, kwargs):
        base = dict(rhs=lambda t, y: y, t0=0.0, state0=(1.0,), t_end=1.0)
        with pytest.raises(ValueError):
            IVProblem(**{**base, **kwargs})


class TestFixedStep:
    def test_uniform_steps(self):
        c = integrate_ivp(IVProblem(lambda t, y: (y[0],), 0.0, (1.0,), 1.0), fixed_step=0.1)
        assert len(c) == 11
        assert np.allclose(np.diff(c.t), 0.1)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(min_value=-3, max_value=3))
    def test_linear_decay_order(self, rate):
        # halving h cuts the error by about 2^5
        def err(n):
            prob = IVProblem(lambda t, y: (rate * y[0],), 0.0, (1.0,), 1.0)
            return abs(integrate_ivp(prob, fixed_step=1 / n).y[-1, 0] - math.exp(rate))

        e1, e2 = err(16), err(32)
        if e1 > 1e-13:
            assert e1 / e2 > 2**4.5


def test_max_step_rel_caps_steps():
    prob = IVProblem(lambda t, y: (y[0],), 1e-3, (1.0,), 1.0)
    c = integrate_ivp(prob, max_step_rel=0.05)
    assert np.all(np.diff(c.t) <= 0.05 * c.t[:-1] * (1 + 1e-12))


def test_event_on_riccati_decay():
    # y = 1/(1+t) reaches 0.5 at t = 1
    prob = IVProblem(lambda t, y: (-y[0] ** 2,), 0.0, (1.0,), 5.0, rtol=1e-10, atol=1e-12)
    c = integrate_ivp(prob, [lambda t, y: y[0] - 0.5])
    assert c.status is Status.EVENT_STOPPED
    assert abs(c.event.t_event - 1.0) < 1e-10
