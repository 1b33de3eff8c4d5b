"""Tests for the closed-form estimators: hand-worked values, equivalence with
independent references, weighting semantics, and the regularized solve."""

import numpy as np
import pytest

from neuralbeta.baselines import (WeightScheme, batched_regularized_wls_beta, batched_wls_beta,
                                  exponential_weights, regularized_wls, rolling_ols,
                                  rolling_wls, tune_half_life)
from neuralbeta.data import windows_from_dataset
from neuralbeta.errors import ConfigError, ContractError, SingularSystemError
from neuralbeta.synthetic import ScenarioConfig, generate_scenario


# -- weight schemes ----------------------------------------------------------

def test_uniform_weights():
    w = WeightScheme().weights(5)
    np.testing.assert_allclose(w, np.full(5, 0.2))


def test_exponential_half_life_semantics():
    # oldest first; the newest point (lag 0) carries the largest weight and
    # weights halve every `half_life` lags
    w = exponential_weights(8, half_life=2.0)
    assert np.all(np.diff(w) > 0)
    np.testing.assert_allclose(w[-1] / w[-3], 2.0, rtol=1e-12)
    np.testing.assert_allclose(w.sum(), 1.0, rtol=1e-12)


def test_weight_scheme_validation():
    with pytest.raises(ConfigError):
        WeightScheme("gaussian")
    with pytest.raises(ConfigError):
        WeightScheme("exponential")
    with pytest.raises(ConfigError):
        WeightScheme("exponential", half_life=0.0)


# -- OLS / WLS ---------------------------------------------------------------

def test_ols_hand_example():
    # y = 2x exactly: X = [1, 2, 3], y = [2, 4, 6]
    est = rolling_ols(np.array([[1.0], [2.0], [3.0]]), np.array([2.0, 4.0, 6.0]))
    assert est.beta[0] == pytest.approx(2.0, abs=1e-12)


def test_wls_hand_example():
    # two points, weights (1, 3): beta = (1*1*1 + 3*2*5) / (1*1 + 3*4) = 31/13
    x = np.array([[1.0], [2.0]])
    y = np.array([1.0, 5.0])

    class Pinned(WeightScheme):
        def weights(self, h):
            return np.array([0.25, 0.75])    # normalized (1, 3)

    est = rolling_wls(x, y, Pinned("uniform"))
    assert est.beta[0] == pytest.approx(31 / 13, abs=1e-12)


def test_ols_matches_lstsq_multivariate():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((40, 3))
    y = rng.standard_normal(40)
    est = rolling_ols(X, y)
    ref = np.linalg.lstsq(X, y, rcond=None)[0]
    np.testing.assert_allclose(est.beta, ref, atol=1e-10)


def test_wls_equals_ols_under_uniform_weights():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((30, 2))
    y = rng.standard_normal(30)
    np.testing.assert_allclose(rolling_wls(X, y, WeightScheme()).beta,
                               rolling_ols(X, y).beta, atol=1e-12)


def test_wls_weight_scale_invariance():
    # multiplying all weights by a constant leaves beta unchanged
    rng = np.random.default_rng(2)
    X = rng.standard_normal((20, 2))
    y = rng.standard_normal(20)
    w = rng.uniform(0.1, 1.0, 20)
    a = regularized_wls(X, y, w, np.zeros(2), np.eye(2) * 1e-12).beta
    b = regularized_wls(X, y, 5 * w, np.zeros(2), np.eye(2) * 1e-12).beta
    np.testing.assert_allclose(a, b, atol=1e-6)


def test_underdetermined_window_rejected():
    with pytest.raises(ContractError):
        rolling_ols(np.ones((1, 2)), np.ones(1))


def test_singular_design_rejected():
    X = np.ones((10, 2))           # perfectly collinear columns
    with pytest.raises(SingularSystemError):
        rolling_ols(X, np.ones(10))


# -- regularized WLS ---------------------------------------------------------

def test_regularized_wls_hand_example():
    # one point x=2, y=6, weight 1, prior mu=1, precision 1:
    # beta = (1*1 + 2*6) / (1 + 4) = 13/5
    est = regularized_wls(np.array([[2.0]]), np.array([6.0]), np.ones(1),
                          np.ones(1), np.ones(1))
    assert est.beta[0] == pytest.approx(13 / 5, abs=1e-12)


def test_regularized_wls_zero_weights_gives_prior_mean():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((10, 2))
    mu = np.array([0.3, -1.2])
    est = regularized_wls(X, rng.standard_normal(10), np.zeros(10), mu, np.ones(2))
    np.testing.assert_allclose(est.beta, mu, atol=1e-12)


def test_regularized_wls_vanishing_prior_gives_wls():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((30, 2))
    y = rng.standard_normal(30)
    w = rng.uniform(0.5, 1.5, 30)
    reg = regularized_wls(X, y, w, np.ones(2), np.full(2, 1e-10)).beta
    Xw = X * w[:, None]
    ref = np.linalg.solve(X.T @ Xw, Xw.T @ y)
    np.testing.assert_allclose(reg, ref, atol=1e-7)


def test_regularized_wls_full_prior_matrix():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((15, 2))
    y = rng.standard_normal(15)
    w = np.ones(15)
    P = np.array([[2.0, 0.5], [0.5, 1.0]])
    mu = np.array([1.0, -1.0])
    est = regularized_wls(X, y, w, mu, P)
    ref = np.linalg.solve(P + X.T @ X, P @ mu + X.T @ y)
    np.testing.assert_allclose(est.beta, ref, atol=1e-12)


def test_regularized_wls_contracts():
    X = np.ones((5, 1))
    y = np.ones(5)
    with pytest.raises(ContractError):
        regularized_wls(X, y, -np.ones(5), np.ones(1), np.ones(1))
    with pytest.raises(ContractError):
        regularized_wls(X, y, np.ones(4), np.ones(1), np.ones(1))
    with pytest.raises(ContractError):
        regularized_wls(X, y, np.ones(5), np.ones(1), -np.ones(1))


# -- batched solvers ---------------------------------------------------------

@pytest.fixture(scope="module")
def batch():
    cfg = ScenarioConfig("stepwise", series_length=40, n_samples=30, seed=9)
    return windows_from_dataset(generate_scenario(cfg), 32)


def test_batched_ols_matches_loop(batch):
    betas = batched_wls_beta(batch.windows_x, batch.windows_y)
    for k in range(batch.n):
        ref = rolling_ols(batch.windows_x[k], batch.windows_y[k]).beta
        np.testing.assert_allclose(betas[k], ref, atol=1e-10)


def test_batched_wls_shared_and_per_window_weights(batch):
    w = exponential_weights(batch.h, 4.0)
    shared = batched_wls_beta(batch.windows_x, batch.windows_y, w)
    tiled = batched_wls_beta(batch.windows_x, batch.windows_y,
                             np.tile(w, (batch.n, 1)))
    np.testing.assert_allclose(shared, tiled, atol=1e-12)
    ref = rolling_wls(batch.windows_x[0], batch.windows_y[0],
                      WeightScheme("exponential", 4.0)).beta
    np.testing.assert_allclose(shared[0], ref, atol=1e-10)


def test_batched_regularized_matches_loop(batch):
    rng = np.random.default_rng(6)
    w = rng.uniform(0.0, 2.0, size=(batch.n, batch.h))
    mu = np.array([0.7])
    prec = np.array([1.3])
    betas = batched_regularized_wls_beta(batch.windows_x, batch.windows_y, w, mu, prec)
    for k in range(0, batch.n, 37):
        ref = regularized_wls(batch.windows_x[k], batch.windows_y[k], w[k], mu, prec).beta
        np.testing.assert_allclose(betas[k], ref, atol=1e-10)


# -- half-life tuning --------------------------------------------------------

def test_tune_half_life_picks_validation_optimum(batch):
    grid = (1, 2, 4, 8, 16, 32)
    scheme = tune_half_life(batch, grid)
    assert scheme.half_life in grid

    def val_rmse(hl):
        w = exponential_weights(batch.h, hl)
        beta = batched_wls_beta(batch.windows_x, batch.windows_y, w)
        pred = (beta * batch.next_x).sum(axis=1)
        return np.sqrt(np.mean((batch.next_y - pred) ** 2))

    best = min(grid, key=val_rmse)
    assert scheme.half_life == best


def test_tune_half_life_empty_grid(batch):
    with pytest.raises(ConfigError):
        tune_half_life(batch, [])
