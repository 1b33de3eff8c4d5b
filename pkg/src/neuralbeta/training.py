"""MSE training with Adam, periodic validation, and best-checkpoint selection.

Batches are drawn uniformly with replacement over all training windows (the
joint average over time and assets), every `validate_every` updates the
validation RMSE of the one-step prediction is computed with dropout off, and
the parameters with the lowest validation RMSE are returned. Runs are
deterministic under a fixed seed: initialization, batch order and dropout
masks are all driven by seeded generators.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .data import WindowBatch
from .errors import ConfigError, ContractError, NonFiniteError
from .models import NeuralBetaModel, predict_y
from .tensor import Tensor

__all__ = ["TrainConfig", "Checkpoint", "TrainResult", "mse_loss", "AdamState", "adam_step", "train"]

GRAD_CLIP_NORM = 10.0


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    max_updates: int = 20_000          # desk-scale default; paper scale is 100_000
    validate_every: int = 1_000
    batch_size: int = 256
    seed: int = 0
    early_stop_patience: int | None = None   # validation rounds without improvement
    keep_snapshots: bool = False             # retain params at every validation point

    def __post_init__(self):
        if min(self.learning_rate, self.max_updates, self.validate_every, self.batch_size) <= 0:
            raise ConfigError("learning_rate, max_updates, validate_every, batch_size must be positive")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ConfigError("early_stop_patience must be >= 1")


@dataclass(frozen=True)
class Checkpoint:
    state: dict
    update_index: int
    validation_rmse: float

    def __post_init__(self):
        if not np.isfinite(self.validation_rmse):
            raise ContractError("checkpoint validation metric must be finite")


@dataclass
class TrainResult:
    best: Checkpoint
    history: list = field(default_factory=list)     # rows: (update, train_loss, val_rmse)
    snapshots: list = field(default_factory=list)   # Checkpoints, when requested
    diverged: bool = False

    def write_log(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["update", "train_loss", "validation_rmse"])
            w.writerows(self.history)


def mse_loss(pred_y: Tensor, true_y) -> Tensor:
    """Mean squared error over the batch."""
    true_y = np.asarray(true_y, dtype=np.float64)
    if true_y.size == 0:
        raise ContractError("mse_loss on an empty batch")
    if pred_y.shape != true_y.shape:
        raise ContractError(f"length mismatch: {pred_y.shape} vs {true_y.shape}")
    return (pred_y - Tensor(true_y)).square().mean()


class AdamState:
    """First/second moment buffers for a named parameter set."""

    def __init__(self, params: dict):
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}


def adam_step(params: dict, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update in place; parameters with no gradient
    are left untouched."""
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for name, p in params.items():
        g = p.grad
        if g is None:
            continue
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for parameter {name!r}")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def _clip_gradients(params: dict, max_norm: float):
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    norm = np.sqrt(total)
    if norm > max_norm:
        scale = max_norm / norm
        for p in params.values():
            if p.grad is not None:
                p.grad *= scale
    return norm


def validation_rmse(model: NeuralBetaModel, batch: WindowBatch, chunk: int = 4096) -> float:
    """RMSE of the one-step prediction with dropout off."""
    sq_sum = 0.0
    for start in range(0, batch.n, chunk):
        sl = slice(start, start + chunk)
        beta, _ = model.forward(batch.windows_x[sl], batch.windows_y[sl], training=False)
        pred = (beta.data * batch.next_x[sl]).sum(axis=1)
        sq_sum += float(np.sum((batch.next_y[sl] - pred) ** 2))
    return float(np.sqrt(sq_sum / batch.n))


def train(model: NeuralBetaModel, train_batch: WindowBatch, val_batch: WindowBatch,
          cfg: TrainConfig, progress=None) -> TrainResult:
    """Run the training loop and return the best checkpoint.

    On divergence (non-finite loss or gradients) training aborts and the last
    good checkpoint is returned with `diverged=True`.
    """
    if train_batch.n == 0 or val_batch.n == 0:
        raise ConfigError("train and validation sets must be non-empty")
    rng_batches = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    rng_dropout = np.random.default_rng(np.random.SeedSequence([cfg.seed, 2]))
    state = AdamState(model.params)
    result = TrainResult(best=Checkpoint(model.state_dict(), 0, validation_rmse(model, val_batch)))
    best_rmse = result.best.validation_rmse
    rounds_since_best = 0
    last_loss = np.nan
    for update in range(1, cfg.max_updates + 1):
        idx = rng_batches.integers(0, train_batch.n, size=cfg.batch_size)
        model.zero_grad()
        try:
            beta, _ = model.forward(train_batch.windows_x[idx], train_batch.windows_y[idx],
                                    training=True, rng=rng_dropout)
            pred = predict_y(beta, train_batch.next_x[idx])
            loss = mse_loss(pred, train_batch.next_y[idx])
            last_loss = loss.item()
            if not np.isfinite(last_loss):
                raise NonFiniteError("training loss is non-finite")
            loss.backward()
            _clip_gradients(model.params, GRAD_CLIP_NORM)
            adam_step(model.params, state, cfg.learning_rate)
        except NonFiniteError:
            result.diverged = True
            model.load_state_dict(result.best.state)
            break
        if update % cfg.validate_every == 0:
            val = validation_rmse(model, val_batch)
            result.history.append((update, last_loss, val))
            ckpt = Checkpoint(model.state_dict(), update, val)
            if cfg.keep_snapshots:
                result.snapshots.append(ckpt)
            if val < best_rmse:
                best_rmse = val
                result.best = ckpt
                rounds_since_best = 0
            else:
                rounds_since_best += 1
            if progress is not None:
                progress(update, last_loss, val)
            if cfg.early_stop_patience is not None and rounds_since_best >= cfg.early_stop_patience:
                break
    model.load_state_dict(result.best.state)
    return result
