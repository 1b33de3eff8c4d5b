"""Tests for the synthetic scenario generators: reproducibility, structural
properties of each coefficient path, and distributional sanity checks against
their known moments."""

import numpy as np
import pytest

from neuralbeta.errors import ConfigError
from neuralbeta.synthetic import (ScenarioConfig, bayes_posterior_mean, cyclical_beta_path,
                                  gen_constant, gen_cyclical, gen_market_like_panel,
                                  gen_stepwise, gen_xy, generate_scenario)


def test_config_validation():
    with pytest.raises(ConfigError):
        ScenarioConfig("weird")
    with pytest.raises(ConfigError):
        ScenarioConfig("constant", series_length=1)
    with pytest.raises(ConfigError):
        ScenarioConfig("constant", n_samples=0)
    with pytest.raises(ConfigError):
        ScenarioConfig("constant", d=2)


def test_generation_is_bit_reproducible():
    cfg = ScenarioConfig("cyclical", series_length=20, n_samples=50, seed=3)
    a = generate_scenario(cfg)
    b = generate_scenario(cfg)
    for sa, sb in zip(a, b):
        np.testing.assert_array_equal(sa.x, sb.x)
        np.testing.assert_array_equal(sa.y, sb.y)
        np.testing.assert_array_equal(sa.beta_true, sb.beta_true)


def test_different_seeds_differ():
    cfg1 = ScenarioConfig("constant", series_length=20, n_samples=5, seed=0)
    cfg2 = ScenarioConfig("constant", series_length=20, n_samples=5, seed=1)
    assert not np.array_equal(generate_scenario(cfg1)[0].x, generate_scenario(cfg2)[0].x)


def test_gen_xy_response_identity():
    rng = np.random.default_rng(0)
    beta = np.linspace(-1, 1, 30)
    s = gen_xy(beta, rng, "t", noise_scale=0.0)
    np.testing.assert_allclose(s.y, (s.beta_true * s.x).sum(axis=1), atol=1e-14)


def test_gen_xy_moments():
    # x ~ t_10: variance 10/8 = 1.25; eps ~ N(0,1)
    rng = np.random.default_rng(1)
    s = gen_xy(np.zeros(200_000), rng, "t")
    assert abs(s.x.var() - 1.25) < 0.03
    assert abs(s.y.var() - 1.0) < 0.02     # beta = 0, so y is pure noise
    assert abs(s.x.mean()) < 0.01


def test_constant_scenario():
    cfg = ScenarioConfig("constant", series_length=30, n_samples=400, seed=2)
    samples = gen_constant(cfg)
    cs = []
    for s in samples:
        assert np.ptp(s.beta_true) == 0.0
        cs.append(s.meta["c"])
    # c ~ N(1, 1) over the population
    assert abs(np.mean(cs) - 1.0) < 0.2
    assert abs(np.std(cs) - 1.0) < 0.15


def test_stepwise_single_interior_jump():
    cfg = ScenarioConfig("stepwise", series_length=65, n_samples=500, seed=4)
    jumps = set()
    for s in gen_stepwise(cfg):
        b = s.beta_true[:, 0]
        changes = np.flatnonzero(np.diff(b) != 0)
        assert len(changes) <= 1      # exactly one regime change (or equal levels)
        j = s.meta["jump"]
        jumps.add(j)
        # the jump lies strictly inside the default lookback window:
        # both regimes occupy at least one of the first T-1 points
        assert 1 <= j <= cfg.series_length - 2
        assert b[0] == s.meta["b_pre"] and b[-1] == s.meta["b_post"]
    assert min(jumps) == 1 and max(jumps) == cfg.series_length - 2


def test_stepwise_pinned_levels_and_range():
    cfg = ScenarioConfig("stepwise", series_length=65, n_samples=20, seed=5)
    for s in gen_stepwise(cfg, jump_range=(10, 10), levels=(2.0, 0.0)):
        assert s.meta["jump"] == 10
        np.testing.assert_array_equal(s.beta_true[:10, 0], 2.0)
        np.testing.assert_array_equal(s.beta_true[10:, 0], 0.0)
    with pytest.raises(ConfigError):
        gen_stepwise(cfg, jump_range=(0, 10))
    with pytest.raises(ConfigError):
        gen_stepwise(cfg, jump_range=(1, 64))


def test_cyclical_beta_path_formula():
    path = cyclical_beta_path(0.5, 8.0, 65)
    t = np.arange(65) / 64
    np.testing.assert_allclose(path[:, 0], np.sin(0.5 + 8.0 * t), atol=1e-14)


def test_cyclical_rate_range():
    cfg = ScenarioConfig("cyclical", series_length=30, n_samples=300, seed=6)
    rates = [s.meta["c"] for s in gen_cyclical(cfg)]
    assert min(rates) >= 4.0 and max(rates) <= 32.0
    # uniform over [4, 32]
    assert abs(np.mean(rates) - 18.0) < 1.0
    for s in gen_cyclical(cfg)[:10]:
        assert np.all(np.abs(s.beta_true) <= 1.0)


# -- Bayes posterior mean ----------------------------------------------------

def test_bayes_posterior_mean_hand_example():
    # X = [[1],[2]], y = [1, 4], mu0 = 1, L0 = 1:
    # (1 + 5)^-1 (1 + 9) = 10/6
    beta = bayes_posterior_mean(np.array([[1.0], [2.0]]), np.array([1.0, 4.0]),
                                prior_mean=np.ones(1), prior_precision=np.ones(1))
    assert beta[0] == pytest.approx(10 / 6, abs=1e-12)


def test_bayes_posterior_mean_empty_window_returns_prior():
    beta = bayes_posterior_mean(np.zeros((0, 2)), np.zeros(0),
                                prior_mean=np.array([1.0, 2.0]), prior_precision=np.ones(2))
    np.testing.assert_array_equal(beta, [1.0, 2.0])


def test_bayes_posterior_shrinks_towards_ols_with_data():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((500, 1))
    y = 3.0 * X[:, 0] + rng.standard_normal(500)
    beta = bayes_posterior_mean(X, y, np.ones(1), np.ones(1))
    ols = np.linalg.lstsq(X, y, rcond=None)[0]
    assert abs(beta[0] - ols[0]) < 0.01


# -- market-like panel -------------------------------------------------------

def test_market_panel_shape_and_dates():
    panel = gen_market_like_panel(n_assets=4, n_days=120, d=3, seed=1)
    assert len(panel) == 4
    for s in panel:
        assert s.length == 120 and s.d == 3
        assert s.beta_true is None
        days = s.dates.astype("datetime64[D]")
        assert np.all(np.diff(days).astype(int) >= 1)
        weekday = (days.view("int64") + 3) % 7
        assert np.all(weekday < 5)          # business days only
    # all assets share the factor series and calendar
    np.testing.assert_array_equal(panel[0].x, panel[1].x)
    np.testing.assert_array_equal(panel[0].dates, panel[1].dates)
