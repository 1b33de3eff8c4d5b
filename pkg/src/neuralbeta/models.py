"""Sequence models over the lookback window with two output heads.

The encoder consumes per-lag features (y_t, x_t) concatenated, either through
a GRU or through causally masked pre-norm self-attention with learned
positional embeddings. The direct head (`nb`) maps the final hidden state to
the coefficient vector. The interpretable head (`nbi`) instead emits one
strictly positive weight per lag (softplus) and obtains the coefficients from
the regularized weighted least squares closed form with a learned Gaussian
prior (global mean, diagonal precision); the whole path, including the linear
solve, is differentiable.

One model instance serves every (x, y) pair in a run; there are no per-asset
parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from . import tensor as T
from .data import WindowBatch
from .errors import ConfigError, ContractError
from .serialize import load_params, save_params
from .tensor import Tensor

__all__ = ["ModelConfig", "NeuralBetaModel", "predict_y"]

HIDDEN_GRID = (32, 64, 128, 256)
DROPOUT_GRID = (0.0, 0.25, 0.5)
LOOKBACK_GRID = (64, 128, 256)

ATTN_HEADS = 4
MLP_EXPANSION = 4
LN_EPS = 1e-5
MASK_NEG = -1e9


@dataclass(frozen=True)
class ModelConfig:
    sequence_kind: str = "attention"    # "gru" | "attention"
    head_kind: str = "nbi"              # "nb" | "nbi"
    hidden_size: int = 32
    dropout: float = 0.0
    lookback: int = 64
    d: int = 1
    n_layers: int = 2
    n_heads: int = ATTN_HEADS
    seed: int = 0

    def __post_init__(self):
        if self.sequence_kind not in ("gru", "attention"):
            raise ConfigError(f"unknown sequence model {self.sequence_kind!r}")
        if self.head_kind not in ("nb", "nbi"):
            raise ConfigError(f"unknown head {self.head_kind!r}")
        if self.hidden_size < 1 or self.lookback < 1 or self.d < 1 or self.n_layers < 1:
            raise ConfigError("hidden_size, lookback, d and n_layers must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.sequence_kind == "attention":
            if self.n_heads < 1:
                raise ConfigError("n_heads must be positive")
            if self.hidden_size % self.n_heads:
                raise ConfigError(f"hidden_size must be divisible by {self.n_heads} heads")


def _uniform_fan_in(rng, fan_in, shape):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def _orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


class NeuralBetaModel:
    """A parameterized coefficient estimator: window -> beta (and, for the
    interpretable head, the per-lag weights that produced it)."""

    def __init__(self, config: ModelConfig):
        self.config = config
        self.params: dict[str, Tensor] = {}
        self._init_params()

    # -- parameters ---------------------------------------------------------

    def _add(self, name: str, value: np.ndarray):
        self.params[name] = Tensor(value, requires_grad=True)

    def _init_params(self):
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        H, d, h = cfg.hidden_size, cfg.d, cfg.lookback
        n_in = d + 1
        if cfg.sequence_kind == "gru":
            size = n_in
            for layer in range(cfg.n_layers):
                self._add(f"gru{layer}.Wx", _uniform_fan_in(rng, size, (size, 3 * H)))
                self._add(f"gru{layer}.Wh", np.hstack([_orthogonal(rng, H) for _ in range(3)]))
                self._add(f"gru{layer}.bx", np.zeros(3 * H))
                self._add(f"gru{layer}.bh", np.zeros(3 * H))
                size = H
        else:
            self._add("embed.W", _uniform_fan_in(rng, n_in, (n_in, H)))
            self._add("embed.b", np.zeros(H))
            self._add("embed.pos", rng.standard_normal((h, H)) * 0.02)
            for layer in range(cfg.n_layers):
                p = f"attn{layer}"
                self._add(f"{p}.ln1.g", np.ones(H))
                self._add(f"{p}.ln1.b", np.zeros(H))
                self._add(f"{p}.qkv.W", _uniform_fan_in(rng, H, (H, 3 * H)))
                self._add(f"{p}.qkv.b", np.zeros(3 * H))
                self._add(f"{p}.proj.W", _uniform_fan_in(rng, H, (H, H)))
                self._add(f"{p}.proj.b", np.zeros(H))
                self._add(f"{p}.ln2.g", np.ones(H))
                self._add(f"{p}.ln2.b", np.zeros(H))
                self._add(f"{p}.mlp.W1", _uniform_fan_in(rng, H, (H, MLP_EXPANSION * H)))
                self._add(f"{p}.mlp.b1", np.zeros(MLP_EXPANSION * H))
                self._add(f"{p}.mlp.W2", _uniform_fan_in(rng, MLP_EXPANSION * H, (MLP_EXPANSION * H, H)))
                self._add(f"{p}.mlp.b2", np.zeros(H))
            self._add("final_ln.g", np.ones(H))
            self._add("final_ln.b", np.zeros(H))
        if cfg.head_kind == "nb":
            self._add("head.W", _uniform_fan_in(rng, H, (H, d)))
            self._add("head.b", np.zeros(d))
        else:
            self._add("head.W", _uniform_fan_in(rng, H, (H, 1)))
            self._add("head.b", np.zeros(1))
            # prior: mean 1, precision softplus(rho) = 1 at init
            self._add("prior.mu", np.ones(d))
            self._add("prior.rho", np.full(d, np.log(np.e - 1.0)))

    def state_dict(self) -> dict:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state_dict(self, state: dict):
        if set(state) != set(self.params):
            raise ContractError("parameter names do not match this model configuration")
        for name, value in state.items():
            if np.shape(value) != self.params[name].shape:
                raise ContractError(f"shape mismatch for {name}")
            self.params[name] = Tensor(np.asarray(value, dtype=np.float64), requires_grad=True)

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def save(self, path):
        save_params(path, self.state_dict(), meta={"model_config": asdict(self.config)})

    @classmethod
    def load(cls, path) -> "NeuralBetaModel":
        state, meta = load_params(path)
        if "model_config" not in meta:
            raise ContractError(f"{path}: checkpoint carries no model configuration")
        model = cls(ModelConfig(**meta["model_config"]))
        model.load_state_dict(state)
        return model

    # -- forward ------------------------------------------------------------

    def _layer_norm(self, x: Tensor, g: Tensor, b: Tensor) -> Tensor:
        m = x.mean(axis=-1, keepdims=True)
        centered = x - m
        var = centered.square().mean(axis=-1, keepdims=True)
        return centered / (var + LN_EPS).sqrt() * g + b

    def _encode_gru(self, feats: Tensor, training, rng) -> Tensor:
        cfg = self.config
        H = cfg.hidden_size
        B, h, _ = feats.shape
        x = feats
        for layer in range(cfg.n_layers):
            p = self.params
            xg = T.matmul(x, p[f"gru{layer}.Wx"]) + p[f"gru{layer}.bx"]   # (B, h, 3H)
            hidden = Tensor(np.zeros((B, H)))
            steps = []
            for t in range(h):
                gx = xg[:, t, :]
                gh = T.matmul(hidden, p[f"gru{layer}.Wh"]) + p[f"gru{layer}.bh"]
                r = (gx[:, :H] + gh[:, :H]).sigmoid()
                z = (gx[:, H:2 * H] + gh[:, H:2 * H]).sigmoid()
                n = (gx[:, 2 * H:] + r * gh[:, 2 * H:]).tanh()
                hidden = (1.0 - z) * n + z * hidden
                steps.append(hidden.reshape(B, 1, H))
            x = T.concat(steps, axis=1)
            x = T.dropout(x, cfg.dropout, training, rng)
        return x

    def _encode_attention(self, feats: Tensor, training, rng) -> Tensor:
        cfg = self.config
        p = self.params
        H, nh = cfg.hidden_size, cfg.n_heads
        dh = H // nh
        B, h, _ = feats.shape
        mask = np.where(np.tril(np.ones((h, h), dtype=bool)), 0.0, MASK_NEG)[None, None]
        x = T.matmul(feats, p["embed.W"]) + p["embed.b"] + p["embed.pos"][:h]
        for layer in range(cfg.n_layers):
            q = f"attn{layer}"
            y = self._layer_norm(x, p[f"{q}.ln1.g"], p[f"{q}.ln1.b"])
            qkv = T.matmul(y, p[f"{q}.qkv.W"]) + p[f"{q}.qkv.b"]          # (B, h, 3H)
            heads = []
            for part in range(3):
                piece = qkv[:, :, part * H:(part + 1) * H]
                heads.append(piece.reshape(B, h, nh, dh).swapaxes(1, 2))  # (B, nh, h, dh)
            qh, kh, vh = heads
            scores = T.matmul(qh * (1.0 / np.sqrt(dh)), kh.swapaxes(-1, -2))
            att = T.softmax(scores, axis=-1, mask=mask)
            ctx = T.matmul(att, vh).swapaxes(1, 2).reshape(B, h, H)
            ctx = T.matmul(ctx, p[f"{q}.proj.W"]) + p[f"{q}.proj.b"]
            x = x + T.dropout(ctx, cfg.dropout, training, rng)
            y = self._layer_norm(x, p[f"{q}.ln2.g"], p[f"{q}.ln2.b"])
            y = (T.matmul(y, p[f"{q}.mlp.W1"]) + p[f"{q}.mlp.b1"]).tanh()
            y = T.matmul(y, p[f"{q}.mlp.W2"]) + p[f"{q}.mlp.b2"]
            x = x + T.dropout(y, cfg.dropout, training, rng)
        return self._layer_norm(x, p["final_ln.g"], p["final_ln.b"])

    def encode(self, window_feats, training: bool = False, rng=None) -> Tensor:
        """Per-lag features (batch, h, d+1) -> hidden states (batch, h, H)."""
        feats = T.as_tensor(window_feats)
        if feats.ndim != 3 or feats.shape[-1] != self.config.d + 1:
            raise ContractError(f"expected (batch, h, {self.config.d + 1}) features, got {feats.shape}")
        if training and self.config.dropout > 0 and rng is None:
            raise ContractError("training-mode encode needs an rng for dropout")
        if self.config.sequence_kind == "gru":
            return self._encode_gru(feats, training, rng)
        return self._encode_attention(feats, training, rng)

    def forward(self, windows_x: np.ndarray, windows_y: np.ndarray,
                training: bool = False, rng=None):
        """Estimate next-step coefficients for a batch of windows.

        Returns (beta, weights): beta is a (batch, d) Tensor; weights is the
        (batch, h) positive per-lag weight Tensor for the interpretable head,
        or None for the direct head.
        """
        B, h, d = windows_x.shape
        feats = np.concatenate([windows_y[:, :, None], windows_x], axis=2)
        hidden = self.encode(feats, training=training, rng=rng)
        p = self.params
        if self.config.head_kind == "nb":
            beta = T.matmul(hidden[:, -1, :], p["head.W"]) + p["head.b"]
            return beta, None
        raw = T.matmul(hidden, p["head.W"]) + p["head.b"]          # (B, h, 1)
        weights = raw.reshape(B, h).softplus()
        prec = p["prior.rho"].softplus()                            # (d,)
        X = Tensor(windows_x)                                       # constants
        Xt = Tensor(windows_x.swapaxes(1, 2).copy())                # (B, d, h)
        Xw = X * weights.reshape(B, h, 1)
        A = T.matmul(Xt, Xw) + Tensor(np.eye(d)) * prec
        wy = (weights * Tensor(windows_y)).reshape(B, h, 1)
        rhs = T.matmul(Xt, wy) + (prec * p["prior.mu"]).reshape(d, 1)
        beta = T.linear_solve(A, rhs).reshape(B, d)
        return beta, weights

    def estimate(self, batch: WindowBatch, chunk: int = 4096):
        """Inference over a full window batch in chunks; returns numpy arrays
        (beta (n, d), weights (n, h) or None)."""
        betas, weights = [], []
        for start in range(0, batch.n, chunk):
            sl = slice(start, start + chunk)
            b, w = self.forward(batch.windows_x[sl], batch.windows_y[sl], training=False)
            betas.append(b.data)
            if w is not None:
                weights.append(w.data)
        return np.concatenate(betas), (np.concatenate(weights) if weights else None)


def predict_y(beta, next_x):
    """One-step prediction: per-row inner product <beta, x_next>."""
    if isinstance(beta, Tensor):
        if beta.shape != np.shape(next_x):
            raise ContractError(f"shape mismatch: {beta.shape} vs {np.shape(next_x)}")
        return (beta * T.as_tensor(next_x)).sum(axis=1)
    beta = np.asarray(beta)
    next_x = np.asarray(next_x)
    if beta.shape != next_x.shape:
        raise ContractError(f"shape mismatch: {beta.shape} vs {next_x.shape}")
    return (beta * next_x).sum(axis=1)
