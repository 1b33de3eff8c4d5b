"""Metrics and analyses: RMSE on predictions and coefficients, improvement
tables versus OLS, checkpoint-trajectory correlation, period sweeps for
cyclical data, and weight-profile studies for the interpretable head."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .baselines import WeightScheme, batched_wls_beta
from .data import WindowBatch
from .errors import ContractError
from .models import NeuralBetaModel

__all__ = ["EvaluationReport", "WeightProfile", "rmse_y", "rmse_beta", "improvement_vs_ols",
           "evaluate_baselines", "evaluate_model", "build_report", "correlation_study",
           "period_sweep", "weight_profile", "stepwise_jump_cohort_profiles", "volatility_overlay"]


def rmse_y(pred_y: np.ndarray, true_y: np.ndarray) -> float:
    """Root mean squared error of the one-step prediction."""
    pred_y = np.asarray(pred_y, dtype=np.float64)
    true_y = np.asarray(true_y, dtype=np.float64)
    if pred_y.shape != true_y.shape or pred_y.size == 0:
        raise ContractError(f"rmse_y needs matching non-empty vectors, got {pred_y.shape} vs {true_y.shape}")
    return float(np.sqrt(np.mean((pred_y - true_y) ** 2)))


def rmse_beta(pred_beta: np.ndarray, true_beta: np.ndarray | None) -> float:
    """RMSE over all coefficient entries; needs ground truth (synthetic data)."""
    if true_beta is None:
        raise ContractError("rmse_beta needs ground-truth coefficients; this dataset has none")
    pred_beta = np.asarray(pred_beta, dtype=np.float64)
    true_beta = np.asarray(true_beta, dtype=np.float64)
    if pred_beta.shape != true_beta.shape or pred_beta.size == 0:
        raise ContractError(f"shape mismatch: {pred_beta.shape} vs {true_beta.shape}")
    return float(np.sqrt(np.mean((pred_beta - true_beta) ** 2)))


def improvement_vs_ols(rmse_ols: float, rmse_model: float) -> float:
    """Percentage improvement in prediction RMSE relative to the OLS benchmark."""
    if rmse_ols <= 0:
        raise ContractError("OLS RMSE must be positive")
    return 100.0 * (rmse_ols - rmse_model) / rmse_ols


@dataclass(frozen=True)
class EstimatorResult:
    name: str
    rmse_y: float
    rmse_beta: float | None
    improvement_pct: float


@dataclass(frozen=True)
class EvaluationReport:
    scenario: str
    n_windows: int
    results: tuple      # EstimatorResult, first entry is the OLS benchmark

    def result(self, name: str) -> EstimatorResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def rows(self):
        for r in self.results:
            yield {"scenario": self.scenario, "estimator": r.name, "rmse_y": r.rmse_y,
                   "rmse_beta": r.rmse_beta, "improvement_pct": r.improvement_pct,
                   "n_windows": self.n_windows}


def evaluate_baselines(batch: WindowBatch, scheme: WeightScheme | None = None) -> dict:
    """Predictions and metrics for OLS (and optionally a weighted scheme)."""
    out = {}
    for name, sch in [("ols", None), (None if scheme is None else "wls", scheme)]:
        if name is None:
            continue
        w = None if sch is None else sch.weights(batch.h)
        beta = batched_wls_beta(batch.windows_x, batch.windows_y, w)
        pred = (beta * batch.next_x).sum(axis=1)
        out[name] = {"beta": beta, "pred": pred, "rmse_y": rmse_y(pred, batch.next_y)}
        if batch.beta_next_true is not None:
            out[name]["rmse_beta"] = rmse_beta(beta, batch.beta_next_true)
    return out


def evaluate_model(model: NeuralBetaModel, batch: WindowBatch) -> dict:
    beta, weights = model.estimate(batch)
    pred = (beta * batch.next_x).sum(axis=1)
    out = {"beta": beta, "pred": pred, "weights": weights, "rmse_y": rmse_y(pred, batch.next_y)}
    if batch.beta_next_true is not None:
        out["rmse_beta"] = rmse_beta(beta, batch.beta_next_true)
    return out


def build_report(scenario: str, batch: WindowBatch, estimators: dict) -> EvaluationReport:
    """Assemble a Table-1-style report; `estimators` maps name -> metrics dict
    as produced by evaluate_baselines / evaluate_model, and must contain 'ols'."""
    if "ols" not in estimators:
        raise ContractError("report needs the OLS benchmark")
    base = estimators["ols"]["rmse_y"]
    results = []
    for name, m in estimators.items():
        results.append(EstimatorResult(name, m["rmse_y"], m.get("rmse_beta"),
                                       improvement_vs_ols(base, m["rmse_y"])))
    return EvaluationReport(scenario, batch.n, tuple(results))


def correlation_study(models, batch: WindowBatch) -> dict:
    """Evaluate a sequence of checkpoints of one training run on a fixed test
    set; returns the (RMSE(y), RMSE(beta)) series and their Pearson r."""
    if len(models) < 3:
        raise ContractError("need at least 3 checkpoints")
    points = []
    for model in models:
        m = evaluate_model(model, batch)
        points.append((m["rmse_y"], m["rmse_beta"]))
    ys, bs = map(np.asarray, zip(*points))
    degenerate = ys.std() == 0 or bs.std() == 0
    r = np.nan if degenerate else float(np.corrcoef(ys, bs)[0, 1])
    return {"points": points, "pearson_r": r, "degenerate": degenerate}


def period_sweep(model_pred: np.ndarray, batch: WindowBatch, rates: np.ndarray,
                 n_buckets: int = 8, rate_range: tuple = (4.0, 32.0)) -> list:
    """Bucket cyclical test windows by angular rate and report the per-bucket
    improvement of the model over OLS (reported against period 2*pi/rate)."""
    rates = np.asarray(rates, dtype=np.float64)
    ols = evaluate_baselines(batch)["ols"]["pred"]
    edges = np.linspace(rate_range[0], rate_range[1], n_buckets + 1)
    rows = []
    for i in range(n_buckets):
        mask = (rates >= edges[i]) & (rates <= edges[i + 1] if i == n_buckets - 1 else rates < edges[i + 1])
        if not mask.any():
            warnings.warn(f"period bucket [{edges[i]:.2f}, {edges[i+1]:.2f}] is empty; dropped")
            continue
        r_ols = rmse_y(ols[mask], batch.next_y[mask])
        r_mod = rmse_y(model_pred[mask], batch.next_y[mask])
        rows.append({
            "rate_low": float(edges[i]), "rate_high": float(edges[i + 1]),
            "period_mid": float(2 * np.pi / ((edges[i] + edges[i + 1]) / 2)),
            "n": int(mask.sum()), "improvement_pct": improvement_vs_ols(r_ols, r_mod),
        })
    return rows


@dataclass(frozen=True)
class WeightProfile:
    """Mean per-lag weights over a cohort of windows, lags oldest to newest."""
    mean_weight: np.ndarray
    mean_log_weight: np.ndarray
    cohort: str
    n_windows: int

    def __post_init__(self):
        if self.n_windows < 1:
            raise ContractError("weight profile needs at least one window")


def weight_profile(model: NeuralBetaModel, batch: WindowBatch, cohort: str = "") -> WeightProfile:
    """Average the interpretable head's per-lag weights over a cohort."""
    if model.config.head_kind != "nbi":
        raise ContractError("weight profiles need the interpretable (nbi) head")
    _, weights = model.estimate(batch)
    return WeightProfile(weights.mean(axis=0), np.log(weights).mean(axis=0), cohort, batch.n)


def stepwise_jump_cohort_profiles(model: NeuralBetaModel, jump_positions, n_per_position: int = 1000,
                                  levels=(2.0, 0.0), seed: int = 0) -> dict:
    """For each jump position, generate a cohort of stepwise windows whose
    coefficient jumps between the given levels at that position, and collect
    the model's average weight profile."""
    from .data import windows_from_dataset
    from .synthetic import ScenarioConfig, gen_stepwise
    h = model.config.lookback
    out = {}
    for k, pos in enumerate(jump_positions):
        cfg = ScenarioConfig("stepwise", series_length=h + 1, n_samples=n_per_position,
                             seed=seed + 7919 * k)
        samples = gen_stepwise(cfg, jump_range=(pos, pos), levels=levels)
        batch = windows_from_dataset(samples, h)
        out[pos] = weight_profile(model, batch, cohort=f"jump@{pos}")
    return out


def volatility_overlay(dates, weights_by_window: np.ndarray, response: np.ndarray,
                       window: int = 5) -> dict:
    """Pair the mean per-window weight with the trailing realized volatility
    (standard deviation of the last `window` returns) of the response series,
    aligned by date, for plotting."""
    dates = np.asarray(dates)
    response = np.asarray(response, dtype=np.float64)
    if len(dates) != len(response) or len(dates) != len(weights_by_window):
        raise ContractError("dates, weights and response must align")
    mean_w = np.asarray([np.mean(w) for w in weights_by_window])
    vol = np.full(len(response), np.nan)
    for i in range(len(response)):
        lo = max(0, i - window + 1)
        vol[i] = np.std(response[lo:i + 1])
    return {"dates": dates, "mean_weight": mean_w, "volatility": vol}
