import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from mixruin.adjustment import adjustment_exponential
from mixruin.closedform import ruin_prob_conditional, ruin_prob_conditional_array, ruin_prob_mixed
from mixruin.errors import UnsupportedJumpLaw
from mixruin.model import Degenerate, Discrete, Exponential, Gamma, IndependentGamma, ModelSpec

from .conftest import PSI_A, R_A

PARAMS = dict(a=st.floats(0.1, 5), b=st.floats(0.1, 5), g=st.floats(0.1, 5), d=st.floats(0.1, 5), c=st.floats(0.01, 5))


class TestConditional:
    @pytest.mark.parametrize("u", [0, 1, 2])
    def test_config_a(self, u):
        assert ruin_prob_conditional(u, 1.0, 1.0, 1.0, 1.0, 0.5) == pytest.approx(PSI_A[u], rel=1e-13)

    def test_certain_ruin(self):
        for u in (0.0, 3.0, 100.0):
            assert ruin_prob_conditional(u, 1.0, 1.0, 1.0, 2.0, 0.5) == 1.0
        # boundary gamma/b - delta/a == c
        assert ruin_prob_conditional(5.0, 0.5, 1.0, 1.0, 2.0, 1.0) == 1.0

    def test_zero_drift(self):
        assert ruin_prob_conditional(2.0, 0.0, 1.0, 1.0, 1.0, 3.0) == pytest.approx(0.5 * math.exp(-1.0), rel=1e-14)
        assert ruin_prob_conditional(2.0, 0.0, 1.0, 1.0, 1.0, 3.0) == pytest.approx(0.183940, abs=1e-6)

    def test_value_at_zero(self):
        assert ruin_prob_conditional(0.0, 1.0, 1.0, 1.0, 1.0, 0.5) == pytest.approx(1 - R_A, rel=1e-14)

    def test_negative_capital(self):
        assert ruin_prob_conditional(-0.1, 1.0, 1.0, 1.0, 1.0, 0.5) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(**PARAMS, u=st.floats(0, 30))
    def test_array_matches_scalar(self, a, b, g, d, c, u):
        scalar = ruin_prob_conditional(u, c, a, b, g, d)
        vec = ruin_prob_conditional_array(u, c, a, b, np.array([g]), np.array([d]))[0]
        assert vec == pytest.approx(scalar, rel=1e-12, abs=1e-300)

    @settings(max_examples=150, deadline=None)
    @given(**PARAMS, u=st.floats(0, 30), du=st.floats(0.01, 5), bump=st.floats(0.01, 1))
    def test_monotonicity(self, a, b, g, d, c, u, du, bump):
        psi = ruin_prob_conditional(u, c, a, b, g, d)
        slack = 1e-12
        assert ruin_prob_conditional(u + du, c, a, b, g, d) <= psi + slack
        assert ruin_prob_conditional(u, c + bump, a, b, g, d) <= psi + slack
        assert ruin_prob_conditional(u, c, a, b, g, d + bump) <= psi + slack
        assert ruin_prob_conditional(u, c, a, b, g + bump, d) >= psi - slack

    @settings(max_examples=150, deadline=None)
    @given(a=st.floats(0.1, 5), b=st.floats(0.1, 5), g=st.floats(0.1, 5), d=st.floats(0.1, 5), u=st.floats(0, 10))
    def test_continuity_at_zero_drift(self, a, b, g, d, u):
        at_zero = ruin_prob_conditional(u, 0.0, a, b, g, d)
        near_zero = ruin_prob_conditional(u, 1e-6, a, b, g, d)
        assert abs(at_zero - near_zero) <= 1e-4

    @settings(max_examples=100, deadline=None)
    @given(**PARAMS)
    def test_value_at_zero_is_one_minus_r_over_b(self, a, b, g, d, c):
        assume(c + d / a > g / b)
        r = adjustment_exponential(c, a, b, g, d).r
        assert ruin_prob_conditional(0.0, c, a, b, g, d) == pytest.approx(1 - r / b, rel=1e-12, abs=1e-15)


def _model(mixing, c=1.0, a=1.0, b=1.0):
    return ModelSpec(1.0, c, Exponential(a), Exponential(b), mixing)


class TestMixed:
    def test_degenerate(self, model_a):
        assert ruin_prob_mixed(model_a, 1.0) == pytest.approx(PSI_A[1], rel=1e-13)

    def test_discrete_example(self, model_discrete):
        assert ruin_prob_mixed(model_discrete, 1.0) == pytest.approx(0.771577812626752622631834419445, rel=1e-13)

    def test_discrete_linearity(self, model_discrete):
        expected = 0.5 * ruin_prob_conditional(1.0, 1.0, 1.0, 1.0, 1.0, 0.5) + 0.5 * 1.0
        assert abs(ruin_prob_mixed(model_discrete, 1.0) - expected) <= 1e-14

    def test_decay_in_u(self):
        mix = Discrete(((1.0, 0.5, 0.3), (0.5, 1.0, 0.7)))
        m = _model(mix)
        values = [ruin_prob_mixed(m, u) for u in np.arange(0, 60, 5.0)]
        assert all(x >= y for x, y in zip(values, values[1:]))
        r_min = min(adjustment_exponential(1.0, 1.0, 1.0, g, d).r for g, d, _ in mix.atoms)
        assert values[-1] <= math.exp(-r_min * 55.0)
        assert values[-1] < 1e-4

    def test_independent_gamma_against_quadrature(self):
        mix = IndependentGamma(2.0, 2.0, 2.0, 4.0)
        m = _model(mix)
        qmc_value = ruin_prob_mixed(m, 1.0)
        fg = stats.gamma(2.0, scale=0.5).pdf
        fd = stats.gamma(2.0, scale=0.25).pdf

        def integrand(d, g):
            return ruin_prob_conditional(1.0, 1.0, 1.0, 1.0, g, d) * fg(g) * fd(d)

        # certain ruin iff g - d >= 1: split the inner integral at the kink
        def inner(g):
            kink = g - 1.0
            if kink <= 0:
                return integrate.quad(lambda d: integrand(d, g), 0, np.inf, epsabs=1e-12)[0]
            return (integrate.quad(lambda d: integrand(d, g), 0, kink, epsabs=1e-12)[0]
                    + integrate.quad(lambda d: integrand(d, g), kink, np.inf, epsabs=1e-12)[0])

        reference = integrate.quad(inner, 0, np.inf, epsabs=1e-10, limit=200, points=None)[0]
        assert qmc_value == pytest.approx(reference, abs=2e-4)

    def test_rejects_non_exponential(self):
        m = ModelSpec(1.0, 1.0, Exponential(1.0), Gamma(2.0, 2.0), Degenerate(1.0, 0.5))
        with pytest.raises(UnsupportedJumpLaw):
            ruin_prob_mixed(m)
