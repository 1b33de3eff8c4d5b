"""Synthetic return scenarios with known ground-truth coefficients.

Three coefficient paths are supported: constant, stepwise (one regime jump
inside the lookback window) and cyclical (sinusoidal). Regressors are i.i.d.
Student-t with 10 degrees of freedom (location 0, scale 1), noise is standard
normal, and y_t = <beta_t, x_t> + eps_t.

Generation is reproducible: a `ScenarioConfig` seed is expanded into
independent per-sample streams with `SeedSequence.spawn`, so the dataset is
bit-identical regardless of how generation is chunked or parallelized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SeriesSample
from .errors import ConfigError
from .baselines import regularized_wls

__all__ = ["ScenarioConfig", "generate_scenario", "gen_xy", "gen_constant", "gen_stepwise",
           "gen_cyclical", "bayes_posterior_mean", "gen_market_like_panel"]

SCENARIOS = ("constant", "stepwise", "cyclical")


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    series_length: int = 65
    n_samples: int = 100_000
    d: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}; expected one of {SCENARIOS}")
        if self.series_length < 2:
            raise ConfigError("series_length must be >= 2")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        if self.d != 1:
            raise ConfigError("synthetic scenarios are univariate (d=1)")


def gen_xy(beta_path: np.ndarray, rng: np.random.Generator, sample_id: str = "",
           noise_scale: float = 1.0, meta: dict | None = None) -> SeriesSample:
    """Draw x ~ t_10(0, 1) and eps ~ N(0, 1) for a given coefficient path and
    assemble the response. `noise_scale=0` is a test hook for noise-free data."""
    beta_path = np.atleast_2d(np.asarray(beta_path, dtype=np.float64))
    if beta_path.shape[0] == 1 and beta_path.shape[1] > 1:
        beta_path = beta_path.T
    T, d = beta_path.shape
    if not np.all(np.isfinite(beta_path)):
        raise ConfigError("beta_path must be finite")
    x = rng.standard_t(10, size=(T, d))
    eps = rng.standard_normal(T) * noise_scale
    y = (beta_path * x).sum(axis=1) + eps
    return SeriesSample(x=x, y=y, beta_true=beta_path, id=sample_id, meta=meta or {})


def _streams(cfg: ScenarioConfig):
    return np.random.SeedSequence(cfg.seed).spawn(cfg.n_samples)


def gen_constant(cfg: ScenarioConfig) -> list:
    """Per sample: one c ~ N(1, 1), beta_t == c for all t."""
    out = []
    for i, ss in enumerate(_streams(cfg)):
        rng = np.random.default_rng(ss)
        c = rng.normal(1.0, 1.0)
        beta = np.full((cfg.series_length, 1), c)
        out.append(gen_xy(beta, rng, f"const{i:06d}", meta={"c": c}))
    return out


def gen_stepwise(cfg: ScenarioConfig, jump_range: tuple | None = None,
                 levels: tuple | None = None) -> list:
    """Piecewise-constant beta with exactly one jump.

    The jump index is uniform over the interior of the lookback window
    (both regimes non-empty among the first T-1 in-window points), and the
    levels before/after are independent N(1, 1) unless `levels` pins them
    (used by the jump-position weight analysis, e.g. levels=(2, 0)).
    """
    lo, hi = jump_range if jump_range is not None else (1, cfg.series_length - 2)
    if not (1 <= lo <= hi <= cfg.series_length - 2):
        raise ConfigError(f"jump range ({lo}, {hi}) outside series interior")
    t = np.arange(cfg.series_length)
    out = []
    for i, ss in enumerate(_streams(cfg)):
        rng = np.random.default_rng(ss)
        jump = int(rng.integers(lo, hi + 1))
        if levels is None:
            b_pre, b_post = rng.normal(1.0, 1.0, size=2)
        else:
            b_pre, b_post = levels
        beta = np.where(t < jump, b_pre, b_post)[:, None].astype(np.float64)
        out.append(gen_xy(beta, rng, f"step{i:06d}",
                          meta={"jump": jump, "b_pre": float(b_pre), "b_post": float(b_post)}))
    return out


def cyclical_beta_path(b0: float, c: float, T: int) -> np.ndarray:
    """beta_t = sin(b0 + c * t / (T-1)): the angular rate c is applied to time
    normalized to [0, 1] over the series, so c=4 > pi spans at least one half
    period per sample."""
    t_norm = np.arange(T) / (T - 1)
    return np.sin(b0 + c * t_norm)[:, None]


def gen_cyclical(cfg: ScenarioConfig) -> list:
    """Sinusoidal beta: b0 ~ N(0, 1), angular rate c ~ U(4, 32) (kept in the
    sample meta for period-bucketed analyses)."""
    out = []
    for i, ss in enumerate(_streams(cfg)):
        rng = np.random.default_rng(ss)
        b0 = rng.normal(0.0, 1.0)
        c = rng.uniform(4.0, 32.0)
        beta = cyclical_beta_path(b0, c, cfg.series_length)
        out.append(gen_xy(beta, rng, f"cyc{i:06d}", meta={"b0": b0, "c": c}))
    return out


def generate_scenario(cfg: ScenarioConfig) -> list:
    if cfg.kind == "constant":
        return gen_constant(cfg)
    if cfg.kind == "stepwise":
        return gen_stepwise(cfg)
    return gen_cyclical(cfg)


def bayes_posterior_mean(window_x: np.ndarray, window_y: np.ndarray,
                         prior_mean: np.ndarray, prior_precision: np.ndarray) -> np.ndarray:
    """Exact posterior mean of beta under a Gaussian prior and unit noise:
    (L0 + X'X)^{-1} (L0 mu0 + X'y). With mu0 = 1, L0 = 1 this is the
    theoretical optimum for the constant scenario."""
    X = np.atleast_2d(np.asarray(window_x, dtype=np.float64))
    if X.shape[0] == 0:
        return np.asarray(prior_mean, dtype=np.float64).reshape(-1)
    L0 = np.asarray(prior_precision, dtype=np.float64)
    if L0.ndim == 1:
        L0 = np.diag(L0)
    mu0 = np.asarray(prior_mean, dtype=np.float64).reshape(-1)
    est = regularized_wls(X, np.asarray(window_y, dtype=np.float64),
                          weights=np.ones(X.shape[0]), prior_mean=mu0,
                          prior_precision=L0)
    return est.beta


def gen_market_like_panel(n_assets: int = 10, n_days: int = 2000, d: int = 3,
                          seed: int = 7) -> list:
    """A small multivariate panel with market-like texture: persistent factor
    vols, slowly drifting multivariate betas, and business-day date stamps.
    Used by the end-to-end pipeline demo and tests; no ground-truth betas are
    attached (they exist, but market data would not have them)."""
    rng = np.random.default_rng(seed)
    dates = np.datetime64("2015-01-01") + np.arange(int(n_days * 1.5) + 7)
    weekday = (dates.astype("datetime64[D]").view("int64") + 3) % 7  # 0 = Monday
    dates = dates[weekday < 5][:n_days]
    dates = np.datetime_as_string(dates, unit="D")
    factors = rng.standard_normal((n_days, d)) * np.array([0.010, 0.006, 0.006])
    out = []
    for i in range(n_assets):
        base = rng.normal([1.0, 0.2, 0.0], [0.3, 0.3, 0.3])
        drift = np.cumsum(rng.standard_normal((n_days, d)) * 0.002, axis=0)
        beta = base[None, :] + drift
        eps = rng.standard_normal(n_days) * 0.008
        y = (beta * factors).sum(axis=1) + eps
        out.append(SeriesSample(x=factors.copy(), y=y, id=f"asset{i:02d}", dates=dates.copy()))
    return out
