import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from statsmodels.stats.proportion import proportion_confint

from mixruin.closedform import ruin_prob_conditional, ruin_prob_mixed
from mixruin.model import Degenerate, Discrete, Empirical, Exponential, Gamma, IndependentGamma, ModelSpec, Pareto, var_surplus
from mixruin.montecarlo import (
    PathState,
    Stream,
    default_horizon,
    estimate_ruin,
    ruin_flags,
    simulate_path,
    simulate_terminal_samples,
    simulate_terminal_value,
    wilson_interval,
)


def _config_a(u=1.0):
    return ModelSpec(u, 1.0, Exponential(1.0), Exponential(1.0), Degenerate(1.0, 0.5))


class TestSimulatePath:
    def test_claim_free_never_ruined(self):
        m = ModelSpec(0.0, 0.5, Exponential(1.0), Exponential(1.0), Degenerate(1.0, 1.0))
        for i in range(50):
            p = simulate_path(m, 0.0, 2.0, 100.0, Stream(3, i))
            assert not p.ruined and p.ruin_time is None
            assert p.claim_count == 0
            assert p.t == 100.0
            assert p.surplus >= 0.5 * 100.0

    def test_zero_capital_zero_drift_ruined_at_first_claim(self):
        m = ModelSpec(0.0, 0.0, Exponential(1.0), Exponential(1.0), Degenerate(1.0, 1.0))
        for i in range(50):
            p = simulate_path(m, 1.0, 0.0, 1e6, Stream(9, i))
            assert p.ruined
            assert p.claim_count == 1 and p.premium_count == 0
            assert p.ruin_time == p.t > 0

    def test_bit_identical_reruns(self):
        m = _config_a()
        runs = [simulate_path(m, 1.0, 0.5, 500.0, Stream(42, 7)) for _ in range(3)]
        assert runs[0] == runs[1] == runs[2]
        assert isinstance(runs[0], PathState)
        assert simulate_path(m, 1.0, 0.5, 500.0, Stream(42, 8)) != runs[0]

    @pytest.mark.parametrize("law", [Gamma(2.0, 2.0), Pareto(1.0, 2.5), Empirical((0.2, 0.7, 1.5))])
    def test_accounting(self, law):
        m = ModelSpec(2.0, 0.7, law, law, Degenerate(1.0, 1.0))
        for i in range(30):
            p = simulate_path(m, 1.0, 1.0, 50.0, Stream(1, i))
            assert p.surplus == pytest.approx(m.u + m.c * p.t + p.premium_total - p.claim_total, abs=1e-9)
            if not p.ruined:
                assert p.surplus >= 0.0

    def test_safe_level_stops_early(self):
        m = _config_a()
        p = simulate_path(m, 1.0, 0.5, 1e6, Stream(5, 0), safe_level=3.0)
        assert p.ruined or p.surplus > 3.0
        assert p.t < 1e6

    def test_rejects_bad_arguments(self):
        m = _config_a()
        with pytest.raises(ValueError):
            simulate_path(m, 1.0, 0.5, 0.0, Stream(1))
        with pytest.raises(ValueError):
            simulate_path(m, 0.0, 0.0, 1.0, Stream(1))
        with pytest.raises(ValueError):
            simulate_path(m, 1.0, 0.5, 1.0, Stream(-1))


class TestWilson:
    @settings(max_examples=100, deadline=None)
    @given(n=st.integers(1, 10**7), frac=st.floats(0.0, 1.0))
    def test_matches_statsmodels(self, n, frac):
        k = int(round(frac * n))
        low, high = wilson_interval(k, n)
        ref_low, ref_high = proportion_confint(k, n, alpha=0.05, method="wilson")
        assert low == pytest.approx(ref_low, abs=1e-12)
        assert high == pytest.approx(ref_high, abs=1e-12)
        assert low <= k / n <= high

    def test_boundaries(self):
        low, high = wilson_interval(0, 100)
        assert low == 0.0 and 0 < high < 0.05
        low, high = wilson_interval(100, 100)
        assert high == 1.0 and 0.95 < low < 1
        with pytest.raises(ValueError):
            wilson_interval(0, 0)


class TestEstimateRuin:
    def test_result_fields(self):
        est = estimate_ruin(_config_a(), horizon=4000.0, n_paths=5000, seed=42)
        assert est.ci_low <= est.estimate <= est.ci_high
        assert est.n_paths == 5000 and est.seed == 42 and est.horizon == 4000.0
        assert est.estimate == est.n_ruined / est.n_paths

    def test_determinism_across_workers_and_chunks(self):
        m = _config_a()
        ref = estimate_ruin(m, horizon=4000.0, n_paths=20_000, seed=42)
        for workers, chunks in ((1, 1), (2, 3), (None, 7)):
            assert estimate_ruin(m, horizon=4000.0, n_paths=20_000, seed=42, workers=workers, chunks=chunks) == ref
        flags = ruin_flags(m, horizon=4000.0, seed=42, start=0, count=1000)
        tail = ruin_flags(m, horizon=4000.0, seed=42, start=600, count=400)
        assert np.array_equal(flags[600:], tail)

    def test_calibration_over_seeds(self):
        m = _config_a()
        psi = ruin_prob_mixed(m)
        covered = 0
        for seed in range(20):
            est = estimate_ruin(m, horizon=4000.0, n_paths=20_000, seed=seed)
            covered += abs(est.estimate - psi) <= 3 * est.half_width
        assert covered >= 19

    def test_monotone_in_u(self):
        m = _config_a()
        ests = [estimate_ruin(m, u, horizon=4000.0, n_paths=50_000, seed=1) for u in (0.0, 1.0, 2.0, 4.0)]
        for lo, hi in zip(ests[1:], ests[:-1]):
            assert lo.estimate <= hi.estimate + lo.half_width + hi.half_width

    def test_discrete_mixing(self, model_discrete):
        est = estimate_ruin(model_discrete, horizon=default_horizon(model_discrete), n_paths=50_000, seed=2)
        assert abs(est.estimate - ruin_prob_mixed(model_discrete)) <= 3 * est.half_width

    def test_gamma_mixing(self):
        m = ModelSpec(1.0, 1.0, Exponential(1.0), Exponential(1.0), IndependentGamma(4.0, 4.0, 4.0, 8.0))
        est = estimate_ruin(m, horizon=default_horizon(m), n_paths=50_000, seed=3)
        assert abs(est.estimate - ruin_prob_mixed(m)) <= 3 * est.half_width

    def test_certain_ruin(self):
        m = ModelSpec(0.0, 1.0, Exponential(1.0), Exponential(1.0), Degenerate(2.0, 0.5))
        est = estimate_ruin(m, horizon=4000.0, n_paths=2000, seed=4)
        assert est.estimate >= 0.99

    def test_safe_exit_bias_negligible(self):
        m = _config_a(2.0)
        fast = estimate_ruin(m, horizon=4000.0, n_paths=5000, seed=6)
        full = estimate_ruin(m, horizon=4000.0, n_paths=5000, seed=6, safe_exit=False)
        assert abs(fast.n_ruined - full.n_ruined) <= 1

    def test_minimum_paths(self):
        with pytest.raises(ValueError):
            estimate_ruin(_config_a(), horizon=10.0, n_paths=99, seed=0)


class TestTerminalValue:
    def test_config_a_moments(self):
        n = 200_000
        x = simulate_terminal_samples(_config_a(), 2.0, n, seed=8)
        mean, var = float(x.mean()), float(x.var(ddof=1))
        se_mean = math.sqrt(var / n)
        m4 = float(np.mean((x - mean) ** 4))
        se_var = math.sqrt((m4 - var * var) / n)
        assert abs(mean - 2.0) <= 4 * se_mean
        assert abs(var - 6.0) <= 4 * se_var

    def test_discrete_variance_matches_total_variance_law(self, model_discrete):
        n = 200_000
        x = simulate_terminal_samples(model_discrete, 1.0, n, seed=9)
        var = float(x.var(ddof=1))
        se_var = math.sqrt((float(np.mean((x - x.mean()) ** 4)) - var * var) / n)
        assert abs(var - var_surplus(model_discrete, 1.0)) <= 4 * se_var

    def test_overdispersion_slope(self):
        m = ModelSpec(0.0, 1.0, Exponential(1.0), Exponential(1.0), Discrete(((0.5, 2.0, 0.5), (2.0, 0.5, 0.5))))
        ts = np.array([1.0, 2.0, 4.0, 8.0])
        vs = np.array([simulate_terminal_value(m, t, 100_000, seed=10)[1] for t in ts])
        alpha, beta = np.linalg.lstsq(np.column_stack([ts, ts**2]), vs, rcond=None)[0]
        assert beta > 0
        assert beta == pytest.approx(2.25, rel=0.15)

    def test_wrapper_consistent(self):
        m = _config_a(0.0)
        x = simulate_terminal_samples(m, 1.5, 2000, seed=11, workers=1)
        assert simulate_terminal_value(m, 1.5, 2000, seed=11) == (float(x.mean()), float(x.var(ddof=1)))

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            simulate_terminal_samples(_config_a(), 0.0, 5000, seed=1)
        with pytest.raises(ValueError):
            simulate_terminal_samples(_config_a(), 1.0, 999, seed=1)


def test_default_horizon():
    assert default_horizon(_config_a()) == pytest.approx(4000.0 / 1.5)
    mix = Discrete(((1.0, 0.5, 0.5), (0.2, 0.3, 0.5)))
    m = ModelSpec(0.0, 1.0, Exponential(1.0), Exponential(1.0), mix)
    assert default_horizon(m) == pytest.approx(4000.0 / 0.5)
