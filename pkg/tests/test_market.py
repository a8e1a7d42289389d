import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import optexec as ox
from optexec.market import ZERO_PRICE_LOG

from conftest import market


class TestMarketParams:
    def test_effective_drift(self):
        p = ox.MarketParams(mu=0.07, sigma=0.2, s0=1.0, phi0=1.0)
        assert p.mu_tilde == pytest.approx(0.05, abs=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            ox.MarketParams(mu=0.0, sigma=0.0, s0=1.0, phi0=1.0)  # mu_tilde = 0
        with pytest.raises(ValueError):
            ox.MarketParams(mu=0.01, sigma=0.2, s0=1.0, phi0=1.0)  # mu_tilde < 0
        with pytest.raises(ValueError):
            ox.MarketParams(mu=0.05, sigma=-0.1, s0=1.0, phi0=1.0)
        with pytest.raises(ValueError):
            ox.MarketParams(mu=0.05, sigma=0.0, s0=-1.0, phi0=1.0)
        with pytest.raises(ValueError):
            ox.MarketParams(mu=0.05, sigma=0.0, s0=1.0, phi0=0.0)
        with pytest.raises(ValueError):
            ox.MarketParams(mu=0.05, sigma=0.0, s0=1.0, phi0=1.0, horizon=1.5)

    def test_round_trip(self):
        p = ox.MarketParams(mu=0.07, sigma=0.2, s0=2.0, phi0=10.0, horizon=0.5)
        assert ox.MarketParams.from_dict(p.to_dict()) == p
        assert "mu_tilde" not in p.to_dict()

    def test_unknown_field(self):
        with pytest.raises(ValueError, match="unknown market fields"):
            ox.MarketParams.from_dict({"mu": 0.05, "sigma": 0, "s0": 1, "phi0": 1, "drift": 2})


class TestStepLogPrice:
    def test_pure_drift(self):
        p = ox.MarketParams(mu=0.05, sigma=0.0, s0=1.0, phi0=1.0)
        assert ox.step_log_price(p, 0.0, 1.0, 123.0) == pytest.approx(-0.05, abs=1e-15)

    def test_exact_formula(self):
        p = ox.MarketParams(mu=0.07, sigma=0.2, s0=1.0, phi0=1.0)
        assert ox.step_log_price(p, 0.0, 0.25, 1.0) == pytest.approx(0.0825, abs=1e-15)

    def test_vanishing_step(self):
        p = ox.MarketParams(mu=0.05, sigma=0.3, s0=1.0, phi0=1.0)
        assert ox.step_log_price(p, 3.0, 1e-9, 0.0) == pytest.approx(3.0, abs=1e-9)

    def test_bad_dt(self):
        p = market(1.0)
        with pytest.raises(ValueError):
            ox.step_log_price(p, 0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            ox.step_log_price(p, 0.0, -0.1, 0.0)

    def test_zero_price_absorbing(self):
        p = ox.MarketParams(mu=0.07, sigma=0.2, s0=0.0, phi0=1.0)
        x = ox.log_price(p.s0)
        assert x == ZERO_PRICE_LOG
        assert ox.step_log_price(p, x, 0.5, 1.3) == ZERO_PRICE_LOG
        assert ox.apply_impact(x, 0.4) == ZERO_PRICE_LOG


class TestExpectedPriceFactor:
    def test_zero_dt(self):
        assert ox.expected_price_factor(market(1.0), 0.0) == 1.0

    def test_value(self):
        assert ox.expected_price_factor(market(1.0), 1.0) == pytest.approx(math.exp(-0.05), abs=1e-15)

    def test_depends_only_on_effective_drift(self):
        base = ox.expected_price_factor(market(1.0, sigma=0.0), 0.5)
        for sigma in (0.1, 0.2, 0.4):
            p = ox.MarketParams(mu=0.05 + 0.5 * sigma * sigma, sigma=sigma, s0=1.0, phi0=1.0)
            assert ox.expected_price_factor(p, 0.5) == pytest.approx(base, rel=1e-14)

    def test_monte_carlo_price_mean(self):
        # sample mean of the one-step price factor vs its exact expectation
        p = ox.MarketParams(mu=0.07, sigma=0.2, s0=1.0, phi0=1.0)
        dt = 0.25
        rng = np.random.default_rng(42)
        z = rng.standard_normal(100_000)
        factors = np.exp(p.sigma * math.sqrt(dt) * z - p.mu * dt)
        stderr = factors.std(ddof=1) / math.sqrt(factors.size)
        assert abs(factors.mean() - ox.expected_price_factor(p, dt)) < 4 * stderr

    def test_monte_carlo_variance(self):
        p = ox.MarketParams(mu=0.07, sigma=0.2, s0=1.0, phi0=1.0)
        dt = 0.25
        rng = np.random.default_rng(7)
        z = rng.standard_normal(100_000)
        increments = np.array([ox.step_log_price(p, 0.0, dt, zi) + p.mu * dt for zi in z[:500]])
        assert np.allclose(increments, p.sigma * math.sqrt(dt) * z[:500])
        increments = p.sigma * math.sqrt(dt) * z
        sample_var = increments.var(ddof=1)
        target = p.sigma**2 * dt
        stderr = target * math.sqrt(2.0 / (z.size - 1))
        assert abs(sample_var - target) < 4 * stderr


class TestApplyImpact:
    def test_identity(self):
        assert ox.apply_impact(0.5, 0.0) == 0.5

    def test_subtraction(self):
        assert ox.apply_impact(0.0, 0.25) == -0.25

    def test_rate_impact_term(self):
        x = math.log(100.0)
        assert ox.apply_impact(x, 0.01 * 25 * 0.1) == pytest.approx(x - 0.025, abs=1e-15)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ox.apply_impact(0.0, -1e-9)

    @given(st.lists(st.floats(0.0, 0.5), min_size=3, max_size=10), st.integers(0, 2**32 - 1))
    def test_heavier_impact_lowers_path(self, impacts, seed):
        # same Gaussian draws, pointwise larger displacements => pointwise lower log price
        p = ox.MarketParams(mu=0.07, sigma=0.2, s0=1.0, phi0=1.0)
        z = np.random.default_rng(seed).standard_normal(len(impacts))
        dt = 1.0 / len(impacts)
        x_light = x_heavy = 0.0
        for brake, zi in zip(impacts, z):
            x_light = ox.step_log_price(p, ox.apply_impact(x_light, brake), dt, zi)
            x_heavy = ox.step_log_price(p, ox.apply_impact(x_heavy, brake + 0.01), dt, zi)
            assert x_heavy < x_light


def test_path_state_price():
    s = ox.PathState(time=0.0, w=0.0, phi=1.0, x=0.0)
    assert s.price == 1.0
    assert ox.PathState(time=0.0, w=0.0, phi=1.0, x=ZERO_PRICE_LOG).price == 0.0
