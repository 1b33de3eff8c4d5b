"""Tests for the evaluation module: metric definitions, report assembly, the
checkpoint correlation study, period sweep bucketing, and weight profiles."""

import numpy as np
import pytest

from neuralbeta.baselines import WeightScheme
from neuralbeta.data import windows_from_dataset
from neuralbeta.errors import ContractError
from neuralbeta.evaluation import (build_report, correlation_study, evaluate_baselines,
                                   evaluate_model, improvement_vs_ols, period_sweep,
                                   rmse_beta, rmse_y, stepwise_jump_cohort_profiles,
                                   volatility_overlay, weight_profile)
from neuralbeta.models import ModelConfig, NeuralBetaModel
from neuralbeta.synthetic import ScenarioConfig, gen_cyclical, generate_scenario


@pytest.fixture(scope="module")
def cyc_batch():
    cfg = ScenarioConfig("cyclical", series_length=17, n_samples=40, seed=2)
    return windows_from_dataset(generate_scenario(cfg), 16)


@pytest.fixture(scope="module")
def nbi_model():
    return NeuralBetaModel(ModelConfig("gru", "nbi", hidden_size=4, lookback=16,
                                       d=1, n_layers=1, seed=0))


# -- metrics -----------------------------------------------------------------

def test_rmse_y_value():
    assert rmse_y(np.array([1.0, 2.0]), np.array([1.0, 0.0])) == pytest.approx(np.sqrt(2.0))
    with pytest.raises(ContractError):
        rmse_y(np.ones(2), np.ones(3))
    with pytest.raises(ContractError):
        rmse_y(np.ones(0), np.ones(0))


def test_rmse_beta_needs_truth():
    assert rmse_beta(np.ones((3, 2)), np.zeros((3, 2))) == pytest.approx(1.0)
    with pytest.raises(ContractError):
        rmse_beta(np.ones((3, 2)), None)


def test_improvement_sign_convention():
    assert improvement_vs_ols(2.0, 1.0) == pytest.approx(50.0)
    assert improvement_vs_ols(2.0, 2.5) == pytest.approx(-25.0)
    with pytest.raises(ContractError):
        improvement_vs_ols(0.0, 1.0)


# -- estimator evaluation ----------------------------------------------------

def test_evaluate_baselines_keys_and_consistency(cyc_batch):
    out = evaluate_baselines(cyc_batch, WeightScheme("exponential", 4.0))
    assert set(out) == {"ols", "wls"}
    for m in out.values():
        assert m["beta"].shape == (cyc_batch.n, 1)
        assert m["rmse_y"] == pytest.approx(rmse_y(m["pred"], cyc_batch.next_y))
        assert "rmse_beta" in m      # synthetic data has ground truth


def test_evaluate_model_shapes(cyc_batch, nbi_model):
    out = evaluate_model(nbi_model, cyc_batch)
    assert out["beta"].shape == (cyc_batch.n, 1)
    assert out["weights"].shape == (cyc_batch.n, cyc_batch.h)
    assert np.isfinite(out["rmse_y"])


def test_build_report(cyc_batch, nbi_model):
    ests = {"ols": evaluate_baselines(cyc_batch)["ols"],
            "model": evaluate_model(nbi_model, cyc_batch)}
    rep = build_report("cyclical", cyc_batch, ests)
    assert rep.result("ols").improvement_pct == pytest.approx(0.0)
    rows = list(rep.rows())
    assert {r["estimator"] for r in rows} == {"ols", "model"}
    assert all(r["n_windows"] == cyc_batch.n for r in rows)
    with pytest.raises(ContractError):
        build_report("x", cyc_batch, {"model": ests["model"]})


# -- correlation study -------------------------------------------------------

def test_correlation_study_perfect_line(cyc_batch, nbi_model):
    # scaling the same model's prior produces co-moving rmse pairs
    models = []
    for mu in (1.0, 0.5, 0.0, -0.5, -1.0):
        m = NeuralBetaModel(nbi_model.config)
        m.load_state_dict(nbi_model.state_dict())
        m.params["prior.mu"].data[:] = mu
        models.append(m)
    out = correlation_study(models, cyc_batch)
    assert len(out["points"]) == 5
    assert not out["degenerate"]
    assert -1.0 <= out["pearson_r"] <= 1.0


def test_correlation_study_degenerate_flag(cyc_batch, nbi_model):
    out = correlation_study([nbi_model] * 3, cyc_batch)
    assert out["degenerate"] and np.isnan(out["pearson_r"])
    with pytest.raises(ContractError):
        correlation_study([nbi_model] * 2, cyc_batch)


# -- period sweep ------------------------------------------------------------

def test_period_sweep_buckets():
    cfg = ScenarioConfig("cyclical", series_length=17, n_samples=300, seed=5)
    samples = gen_cyclical(cfg)
    batch = windows_from_dataset(samples, 16)
    rates = np.array([s.meta["c"] for s in samples])
    pred = evaluate_baselines(batch)["ols"]["pred"]     # model == ols
    rows = period_sweep(pred, batch, rates, n_buckets=8)
    assert len(rows) == 8
    assert sum(r["n"] for r in rows) == batch.n
    for r in rows:
        assert r["improvement_pct"] == pytest.approx(0.0, abs=1e-9)
        assert r["period_mid"] == pytest.approx(2 * np.pi / ((r["rate_low"] + r["rate_high"]) / 2))


def test_period_sweep_warns_on_empty_bucket(cyc_batch):
    rates = np.full(cyc_batch.n, 5.0)       # everything in the first bucket
    pred = np.zeros(cyc_batch.n)
    with pytest.warns(UserWarning, match="empty"):
        rows = period_sweep(pred, cyc_batch, rates, n_buckets=4)
    assert len(rows) == 1


# -- weight profiles ---------------------------------------------------------

def test_weight_profile_basic(cyc_batch, nbi_model):
    prof = weight_profile(nbi_model, cyc_batch, cohort="all")
    assert prof.mean_weight.shape == (cyc_batch.h,)
    assert np.all(prof.mean_weight > 0)
    assert prof.n_windows == cyc_batch.n
    nb = NeuralBetaModel(ModelConfig("gru", "nb", hidden_size=4, lookback=16, d=1, seed=0))
    with pytest.raises(ContractError):
        weight_profile(nb, cyc_batch)


def test_stepwise_jump_cohort_profiles_deterministic():
    model = NeuralBetaModel(ModelConfig("gru", "nbi", hidden_size=4, lookback=16,
                                        d=1, n_layers=1, seed=0))
    a = stepwise_jump_cohort_profiles(model, [4, 12], n_per_position=20, seed=1)
    b = stepwise_jump_cohort_profiles(model, [4, 12], n_per_position=20, seed=1)
    assert set(a) == {4, 12}
    for pos in a:
        np.testing.assert_array_equal(a[pos].mean_weight, b[pos].mean_weight)
        assert a[pos].n_windows == 20


# -- volatility overlay ------------------------------------------------------

def test_volatility_overlay_alignment():
    rng = np.random.default_rng(0)
    resp = rng.standard_normal(30)
    dates = np.arange(30)
    weights = rng.uniform(0.1, 1.0, size=(30, 8))
    out = volatility_overlay(dates, weights, resp, window=5)
    assert out["mean_weight"].shape == (30,)
    assert out["volatility"].shape == (30,)
    np.testing.assert_allclose(out["volatility"][10], np.std(resp[6:11]))
    with pytest.raises(ContractError):
        volatility_overlay(dates[:10], weights, resp)
