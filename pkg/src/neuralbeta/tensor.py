"""Dense float64 tensors with reverse-mode automatic differentiation.

Each `Tensor` wraps a numpy array and remembers the operation that produced
it, so the computation graph doubles as the gradient tape: `backward()` walks
the graph once in reverse topological order and accumulates adjoints into the
`grad` buffer of every tensor created with `requires_grad=True`.

Only trailing-dimension (numpy-style) broadcasting is supported, and only the
ops needed by the estimators in this package are implemented. Everything is
64-bit; values are treated as immutable once a tensor is created (gradient
buffers are the one exception).
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, ConfigError, NonFiniteError, ShapeError, SingularSystemError

__all__ = [
    "Tensor",
    "as_tensor",
    "matmul",
    "softmax",
    "linear_solve",
    "dropout",
    "concat",
]


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    # sum over prepended axes
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    # sum over axes broadcast from extent 1
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """A node in the autodiff graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad: bool = False, _parents=(), _backward=None, _op: str = ""):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = _parents
        self._backward = _backward
        self._op = _op

    # -- basic introspection ------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self._op or 'leaf'}, requires_grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self):
        self.grad = None

    # -- graph bookkeeping --------------------------------------------------

    def _needs_graph(self, *others) -> bool:
        return self.requires_grad or any(o.requires_grad for o in others)

    def _accumulate(self, grad: np.ndarray, owned: bool = False):
        """Add `grad` to the gradient buffer. `owned=True` promises that the
        caller holds no other reference to `grad` (a fresh temporary), letting
        the first accumulation adopt the array instead of copying it."""
        if self.grad is None:
            self.grad = grad if owned else grad.copy()
        else:
            self.grad += grad

    def backward(self):
        """Reverse sweep from a scalar loss; populates `grad` on every
        requires_grad tensor reachable from this node."""
        if self.data.size != 1:
            raise ContractError(f"backward() requires a scalar, got shape {self.shape}")
        topo: list[Tensor] = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in seen:
                continue
            if expanded:
                seen.add(id(node))
                topo.append(node)
            else:
                stack.append((node, True))
                for p in node._parents:
                    if id(p) not in seen:
                        stack.append((p, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data + other.data, self._needs_graph(other), (self, other), _op="add")
        if out.requires_grad:
            def bw(g):
                if self.requires_grad:
                    ga = _unbroadcast(g, self.shape)
                    self._accumulate(ga, owned=ga is not g)
                if other.requires_grad:
                    gb = _unbroadcast(g, other.shape)
                    other._accumulate(gb, owned=gb is not g)
            out._backward = bw
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, self.requires_grad, (self,), _op="neg")
        if out.requires_grad:
            out._backward = lambda g: self._accumulate(-g, owned=True)
        return out

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data * other.data, self._needs_graph(other), (self, other), _op="mul")
        if out.requires_grad:
            def bw(g):
                if self.requires_grad:
                    self._accumulate(_unbroadcast(g * other.data, self.shape), owned=True)
                if other.requires_grad:
                    other._accumulate(_unbroadcast(g * self.data, other.shape), owned=True)
            out._backward = bw
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.data / other.data
        if not np.all(np.isfinite(val)):
            raise NonFiniteError("division produced non-finite values")
        out = Tensor(val, self._needs_graph(other), (self, other), _op="div")
        if out.requires_grad:
            def bw(g):
                if self.requires_grad:
                    self._accumulate(_unbroadcast(g / other.data, self.shape), owned=True)
                if other.requires_grad:
                    other._accumulate(_unbroadcast(-g * val / other.data, other.shape), owned=True)
            out._backward = bw
        return out

    def __rtruediv__(self, other):
        return as_tensor(other) / self

    def __matmul__(self, other):
        return matmul(self, other)

    # -- pointwise nonlinearities -------------------------------------------

    def tanh(self):
        val = np.tanh(self.data)
        out = Tensor(val, self.requires_grad, (self,), _op="tanh")
        if out.requires_grad:
            out._backward = lambda g: self._accumulate(g * (1.0 - val * val), owned=True)
        return out

    def sigmoid(self):
        val = 0.5 * (np.tanh(0.5 * self.data) + 1.0)  # stable for large |x|
        out = Tensor(val, self.requires_grad, (self,), _op="sigmoid")
        if out.requires_grad:
            out._backward = lambda g: self._accumulate(g * val * (1.0 - val), owned=True)
        return out

    def exp(self):
        with np.errstate(over="ignore"):
            val = np.exp(self.data)
        if not np.all(np.isfinite(val)):
            raise NonFiniteError("exp overflow")
        out = Tensor(val, self.requires_grad, (self,), _op="exp")
        if out.requires_grad:
            out._backward = lambda g: self._accumulate(g * val, owned=True)
        return out

    def softplus(self):
        val = np.logaddexp(0.0, self.data)
        out = Tensor(val, self.requires_grad, (self,), _op="softplus")
        if out.requires_grad:
            sig = 0.5 * (np.tanh(0.5 * self.data) + 1.0)
            out._backward = lambda g: self._accumulate(g * sig, owned=True)
        return out

    def square(self):
        out = Tensor(self.data * self.data, self.requires_grad, (self,), _op="square")
        if out.requires_grad:
            out._backward = lambda g: self._accumulate(g * 2.0 * self.data, owned=True)
        return out

    def sqrt(self):
        with np.errstate(invalid="ignore"):
            val = np.sqrt(self.data)
        if not np.all(np.isfinite(val)):
            raise NonFiniteError("sqrt of negative value")
        out = Tensor(val, self.requires_grad, (self,), _op="sqrt")
        if out.requires_grad:
            out._backward = lambda g: self._accumulate(g * 0.5 / val, owned=True)
        return out

    # -- reductions and shape ops -------------------------------------------

    def sum(self, axis=None, keepdims: bool = False):
        val = self.data.sum(axis=axis, keepdims=keepdims)
        out = Tensor(val, self.requires_grad, (self,), _op="sum")
        if out.requires_grad:
            def bw(g):
                if axis is not None and not keepdims:
                    g = np.expand_dims(g, axis)
                self._accumulate(np.broadcast_to(g, self.shape).copy(), owned=True)
            out._backward = bw
        return out

    def mean(self, axis=None, keepdims: bool = False):
        n = self.size if axis is None else np.prod([self.shape[a] for a in np.atleast_1d(axis)])
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out = Tensor(self.data.reshape(shape), self.requires_grad, (self,), _op="reshape")
        if out.requires_grad:
            out._backward = lambda g: self._accumulate(g.reshape(self.shape), owned=True)
        return out

    def swapaxes(self, a: int, b: int):
        out = Tensor(np.ascontiguousarray(self.data.swapaxes(a, b)), self.requires_grad, (self,), _op="swapaxes")
        if out.requires_grad:
            out._backward = lambda g: self._accumulate(g.swapaxes(a, b), owned=True)
        return out

    def __getitem__(self, idx):
        out = Tensor(self.data[idx], self.requires_grad, (self,), _op="slice")
        if out.requires_grad:
            def bw(g):
                full = np.zeros_like(self.data)
                full[idx] = g
                self._accumulate(full, owned=True)
            out._backward = bw
        return out


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with numpy batching over leading dimensions."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim == 0 or b.ndim == 0:
        raise ShapeError("matmul requires at least 1-d operands")
    if a.shape[-1] != b.shape[-2 if b.ndim > 1 else 0]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} vs {b.shape}")
    out = Tensor(np.matmul(a.data, b.data), a._needs_graph(b), (a, b), _op="matmul")
    if out.requires_grad:
        def bw(g):
            if a.requires_grad:
                ga = np.matmul(g, b.data.swapaxes(-1, -2)) if b.ndim > 1 else np.multiply.outer(g, b.data)
                a._accumulate(_unbroadcast(ga, a.shape), owned=True)
            if b.requires_grad:
                gb = np.matmul(a.data.swapaxes(-1, -2), g) if a.ndim > 1 else np.multiply.outer(a.data, g)
                b._accumulate(_unbroadcast(gb, b.shape), owned=True)
        out._backward = bw
    return out


def softmax(x: Tensor, axis: int = -1, mask: np.ndarray | None = None) -> Tensor:
    """Numerically stable softmax along `axis` (max-subtraction).

    `mask`, when given, is a constant additive bias (broadcastable to x) fused
    into the logits; large negative entries exclude positions. Folding it in
    here avoids materializing an extra logits-sized node in the graph.
    """
    x = as_tensor(x)
    if x.shape[axis] == 0:
        raise ShapeError("softmax along an empty axis")
    logits = x.data if mask is None else x.data + np.asarray(mask, dtype=np.float64)
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    val = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(val, x.requires_grad, (x,), _op="softmax")
    if out.requires_grad:
        def bw(g):
            dot = (g * val).sum(axis=axis, keepdims=True)
            x._accumulate(val * (g - dot), owned=True)
        out._backward = bw
    return out


def linear_solve(A: Tensor, b: Tensor) -> Tensor:
    """Solve A z = b for symmetric positive-definite A, differentiably.

    A may carry leading batch dimensions (`(..., d, d)` against `(..., d)` or
    `(..., d, 1)`). Positive-definiteness is verified with a Cholesky
    factorization; the backward pass uses the adjoint solve, so gradients flow
    to both A and b.
    """
    A, b = as_tensor(A), as_tensor(b)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ShapeError(f"linear_solve needs a square matrix, got {A.shape}")
    vec = b.ndim == A.ndim - 1
    b_mat = b.data[..., None] if vec else b.data
    if b_mat.shape[-2] != A.shape[-1]:
        raise ShapeError(f"linear_solve shapes disagree: {A.shape} vs {b.shape}")
    try:
        np.linalg.cholesky(A.data)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"matrix is not positive-definite within tolerance: {exc}") from exc
    z_mat = np.linalg.solve(A.data, b_mat)
    val = z_mat[..., 0] if vec else z_mat
    out = Tensor(val, A._needs_graph(b), (A, b), _op="linear_solve")
    if out.requires_grad:
        def bw(g):
            g_mat = g[..., None] if vec else g
            # adjoint solve: s = A^{-T} g; A is symmetric here
            s = np.linalg.solve(A.data.swapaxes(-1, -2), g_mat)
            if b.requires_grad:
                b._accumulate(_unbroadcast(s[..., 0] if vec else s, b.shape), owned=True)
            if A.requires_grad:
                gA = -np.matmul(s, z_mat.swapaxes(-1, -2))
                A._accumulate(_unbroadcast(gA, A.shape), owned=True)
        out._backward = bw
    return out


def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: zero with probability `rate` and rescale survivors
    by 1/(1-rate) during training; identity at inference."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    x = as_tensor(x)
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ContractError("training-mode dropout needs an rng")
    scale = 1.0 / (1.0 - rate)
    mask = (rng.random(x.shape) >= rate) * scale
    out = Tensor(x.data * mask, x.requires_grad, (x,), _op="dropout")
    if out.requires_grad:
        out._backward = lambda g: x._accumulate(g * mask, owned=True)
    return out


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    val = np.concatenate([t.data for t in tensors], axis=axis)
    needs = any(t.requires_grad for t in tensors)
    out = Tensor(val, needs, tuple(tensors), _op="concat")
    if needs:
        sizes = [t.shape[axis] for t in tensors]
        splits = np.cumsum(sizes)[:-1]
        def bw(g):
            for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
                if t.requires_grad:
                    t._accumulate(piece, owned=True)
        out._backward = bw
    return out
