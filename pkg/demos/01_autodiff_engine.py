"""A tour of the in-package autodiff engine.

The Tensor class wraps float64 numpy arrays and records the computation graph
as it is built; calling backward() on a scalar walks the graph in reverse and
fills in gradients. This demo builds a few small graphs, prints the gradients,
and cross-checks one of them against central finite differences.

Run:  python3 demos/01_autodiff_engine.py
"""

import numpy as np

from neuralbeta import tensor as T
from neuralbeta.tensor import Tensor


def section(title):
    print(f"\n=== {title} ===")


section("scalar chain rule")
# f(a, b) = tanh(a * b) + a^2
a = Tensor(np.array(0.7), requires_grad=True)
b = Tensor(np.array(-1.2), requires_grad=True)
f = (a * b).tanh() + a.square()
f.backward()
print(f"f            = {f.item():+.6f}")
print(f"df/da        = {float(a.grad):+.6f}   (expect b*sech^2(ab) + 2a)")
print(f"df/db        = {float(b.grad):+.6f}   (expect a*sech^2(ab))")
sech2 = 1.0 - np.tanh(0.7 * -1.2) ** 2
print(f"hand values  = {-1.2 * sech2 + 1.4:+.6f}, {0.7 * sech2:+.6f}")

section("broadcasting sums gradients where numpy broadcast values")
w = Tensor(np.array([1.0, 2.0, 3.0]), requires_grad=True)
x = Tensor(np.arange(12.0).reshape(4, 3))
(w * x).sum().backward()
print(f"d sum(w*x)/dw = {w.grad}   (column sums of x)")

section("a matrix pipeline: least squares by hand")
rng = np.random.default_rng(0)
X = rng.standard_normal((50, 2))
y_true = X @ np.array([1.5, -0.5]) + 0.1 * rng.standard_normal(50)
beta = Tensor(np.zeros(2), requires_grad=True)
for step in range(200):
    beta.zero_grad()
    resid = T.matmul(Tensor(X), beta.reshape(2, 1)).reshape(50) - Tensor(y_true)
    loss = resid.square().mean()
    loss.backward()
    beta.data -= 0.1 * beta.grad
print(f"gradient-descent beta = {beta.data.round(4)}")
print(f"closed-form beta      = {np.linalg.lstsq(X, y_true, rcond=None)[0].round(4)}")

section("the differentiable SPD solve used by the interpretable head")
A = Tensor(np.array([[2.0, 0.5], [0.5, 1.0]]), requires_grad=True)
rhs = Tensor(np.array([1.0, 2.0]), requires_grad=True)
z = T.linear_solve(A, rhs)
z.sum().backward()
print(f"z          = {z.data.round(6)}")
print(f"d sum(z)/d rhs = {rhs.grad.round(6)}   (rows of A^-1 summed)")
print(f"d sum(z)/d A   =\n{A.grad.round(6)}")

section("finite-difference check")
val = rng.standard_normal(5)


def loss_of(v):
    t = Tensor(v)
    return ((t.softplus() * Tensor(np.arange(5.0))).sum()).item()


t = Tensor(val.copy(), requires_grad=True)
(t.softplus() * Tensor(np.arange(5.0))).sum().backward()
step = 1e-6
for i in range(5):
    bumped = val.copy()
    bumped[i] += step
    dipped = val.copy()
    dipped[i] -= step
    fd = (loss_of(bumped) - loss_of(dipped)) / (2 * step)
    print(f"  entry {i}: autodiff {t.grad[i]:+.8f}   finite diff {fd:+.8f}")
