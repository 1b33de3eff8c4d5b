"""Closed-form coefficient estimators on a lookback window.

Rolling OLS, exponentially weighted rolling WLS (half-life parameterized so a
weight halves every `half_life` lags), and the generic regularized weighted
least squares solve shared with the interpretable neural head. The model has
no intercept; callers wanting one add a constant regressor column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError, SingularSystemError

__all__ = ["WeightScheme", "BetaEstimate", "exponential_weights", "rolling_ols", "rolling_wls",
           "regularized_wls", "batched_wls_beta", "batched_regularized_wls_beta", "tune_half_life"]

RCOND_TOL = 1e-12


@dataclass(frozen=True)
class WeightScheme:
    kind: str = "uniform"              # "uniform" | "exponential"
    half_life: float | None = None     # lags until a weight halves

    def __post_init__(self):
        if self.kind not in ("uniform", "exponential"):
            raise ConfigError(f"unknown weight scheme {self.kind!r}")
        if self.kind == "exponential" and (self.half_life is None or self.half_life <= 0):
            raise ConfigError(f"exponential scheme needs half_life > 0, got {self.half_life}")

    def weights(self, h: int) -> np.ndarray:
        """Per-lag weights for a window of length h, oldest first, normalized
        to sum to 1 (the normalization cancels inside WLS; it is applied for
        reporting only)."""
        if self.kind == "uniform":
            w = np.ones(h)
        else:
            lag = np.arange(h - 1, -1, -1, dtype=np.float64)   # newest point has lag 0
            w = 2.0 ** (-lag / self.half_life)
        return w / w.sum()


def exponential_weights(h: int, half_life: float) -> np.ndarray:
    return WeightScheme("exponential", half_life).weights(h)


@dataclass(frozen=True)
class BetaEstimate:
    beta: np.ndarray                       # (d,)
    weights_used: np.ndarray | None = None  # (h,) per-lag, oldest first
    condition_number: float = np.nan


def _solve_normal_eqs(A: np.ndarray, rhs: np.ndarray, context: str) -> tuple:
    """Solve A beta = rhs, rejecting ill-conditioned systems loudly."""
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or 1.0 / cond < RCOND_TOL:
        raise SingularSystemError(f"{context}: system is singular within tolerance (cond={cond:.3e})")
    return np.linalg.solve(A, rhs), cond


def rolling_ols(window_x: np.ndarray, window_y: np.ndarray) -> BetaEstimate:
    """beta = (X'X)^{-1} X'y on one lookback window."""
    X = np.atleast_2d(np.asarray(window_x, dtype=np.float64))
    y = np.asarray(window_y, dtype=np.float64)
    h, d = X.shape
    if h < d:
        raise ContractError(f"window of {h} rows cannot identify {d} coefficients")
    beta, cond = _solve_normal_eqs(X.T @ X, X.T @ y, "rolling_ols")
    return BetaEstimate(beta=beta, condition_number=cond)


def rolling_wls(window_x: np.ndarray, window_y: np.ndarray, scheme: WeightScheme) -> BetaEstimate:
    """beta = (X'WX)^{-1} X'Wy with W = diag(scheme weights)."""
    X = np.atleast_2d(np.asarray(window_x, dtype=np.float64))
    y = np.asarray(window_y, dtype=np.float64)
    h, d = X.shape
    if h < d:
        raise ContractError(f"window of {h} rows cannot identify {d} coefficients")
    w = scheme.weights(h)
    Xw = X * w[:, None]
    beta, cond = _solve_normal_eqs(X.T @ Xw, Xw.T @ y, "rolling_wls")
    return BetaEstimate(beta=beta, weights_used=w, condition_number=cond)


def regularized_wls(window_x: np.ndarray, window_y: np.ndarray, weights: np.ndarray,
                    prior_mean: np.ndarray, prior_precision: np.ndarray) -> BetaEstimate:
    """beta = (P + X'WX)^{-1} (P mu + X'Wy) with prior precision P.

    P may be a positive diagonal given as a vector, or a full SPD matrix.
    Always well-posed: the prior keeps the system positive-definite even when
    every data weight is zero.
    """
    X = np.atleast_2d(np.asarray(window_x, dtype=np.float64))
    y = np.asarray(window_y, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ContractError("weights must be non-negative")
    if w.shape != (X.shape[0],):
        raise ContractError(f"need one weight per window row, got {w.shape} for {X.shape}")
    mu = np.asarray(prior_mean, dtype=np.float64).reshape(-1)
    P = np.asarray(prior_precision, dtype=np.float64)
    if P.ndim <= 1:
        P = np.diag(np.broadcast_to(P, mu.shape))
    if np.any(np.linalg.eigvalsh(P) <= 0):
        raise ContractError("prior precision must be positive-definite")
    Xw = X * w[:, None]
    A = P + X.T @ Xw
    beta, cond = _solve_normal_eqs(A, P @ mu + Xw.T @ y, "regularized_wls")
    return BetaEstimate(beta=beta, weights_used=w, condition_number=cond)


def batched_wls_beta(windows_x: np.ndarray, windows_y: np.ndarray,
                     weights: np.ndarray | None = None) -> np.ndarray:
    """Vectorized OLS/WLS over a stack of windows: (n, h, d) x (n, h) -> (n, d).

    `weights` may be (h,) shared per-lag weights or (n, h) per-window weights;
    None means uniform (OLS).
    """
    X = windows_x
    y = windows_y
    if weights is None:
        Xw = X
    else:
        w = np.asarray(weights, dtype=np.float64)
        Xw = X * (w[None, :, None] if w.ndim == 1 else w[:, :, None])
    A = np.einsum("nhd,nhe->nde", Xw, X, optimize=True)
    rhs = np.einsum("nhd,nh->nd", Xw, y, optimize=True)
    try:
        return np.linalg.solve(A, rhs[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"batched WLS hit a singular window: {exc}") from exc


def batched_regularized_wls_beta(windows_x: np.ndarray, windows_y: np.ndarray,
                                 weights: np.ndarray, prior_mean: np.ndarray,
                                 prior_precision_diag: np.ndarray) -> np.ndarray:
    """Vectorized regularized WLS with per-window weights (n, h) and a shared
    diagonal prior; the numpy twin of the differentiable neural head."""
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ContractError("weights must be non-negative")
    prec = np.asarray(prior_precision_diag, dtype=np.float64)
    if np.any(prec <= 0):
        raise ContractError("prior precision must be strictly positive")
    X, y = windows_x, windows_y
    Xw = X * w[:, :, None]
    A = np.einsum("nhd,nhe->nde", Xw, X, optimize=True) + np.diag(prec)[None]
    rhs = np.einsum("nhd,nh->nd", Xw, y, optimize=True) + (prec * np.asarray(prior_mean))[None]
    return np.linalg.solve(A, rhs[:, :, None])[:, :, 0]


def tune_half_life(validation, grid) -> WeightScheme:
    """Pick the exponential half-life minimizing validation RMSE of the
    one-step prediction; ties break toward the larger (smoother) half-life."""
    grid = list(grid)
    if not grid or validation.n == 0:
        raise ConfigError("tune_half_life needs a non-empty grid and validation set")
    best = None
    for hl in grid:
        w = exponential_weights(validation.h, hl)
        beta = batched_wls_beta(validation.windows_x, validation.windows_y, w)
        pred = (beta * validation.next_x).sum(axis=1)
        rmse = float(np.sqrt(np.mean((validation.next_y - pred) ** 2)))
        if best is None or rmse < best[0] - 1e-15 or (abs(rmse - best[0]) <= 1e-15 and hl > best[1]):
            best = (rmse, hl)
    return WeightScheme("exponential", best[1])
