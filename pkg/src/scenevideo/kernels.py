"""Dense numerical kernels: matmul, softmax, scaled dot-product attention,
their analytic gradients, and a central-difference gradient checker.

Arrays are numpy ndarrays. Kernels promote to float64 so reductions
accumulate in double precision; callers quantize to float32 where a stored
format requires it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import ShapeMismatch

# below this magnitude gradients are compared absolutely; central differences
# carry ~1e-13 round-off at eps=1e-3
REL_FLOOR = 1e-6


def _f64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def matmul(a, b) -> np.ndarray:
    """Matrix product over the last two axes (leading axes broadcast)."""
    a, b = _f64(a), _f64(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatch(f"matmul needs >= 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


def softmax(x, axis: int = -1) -> np.ndarray:
    x = _f64(x)
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_backward(y: np.ndarray, dy: np.ndarray, axis: int = -1) -> np.ndarray:
    """Vector-Jacobian product of softmax given its output ``y``."""
    return y * (dy - (dy * y).sum(axis=axis, keepdims=True))


def _check_attention_shapes(Q, K, V):
    if Q.ndim < 2 or K.ndim != Q.ndim or V.ndim != Q.ndim:
        raise ShapeMismatch(f"attention operands must share rank >= 2: {Q.shape}, {K.shape}, {V.shape}")
    if Q.shape[-1] != K.shape[-1]:
        raise ShapeMismatch(f"query/key widths differ: {Q.shape[-1]} vs {K.shape[-1]}")
    if K.shape[-2] != V.shape[-2]:
        raise ShapeMismatch(f"key/value counts differ: {K.shape[-2]} vs {V.shape[-2]}")


def scaled_dot_attention(Q, K, V) -> tuple[np.ndarray, np.ndarray]:
    """softmax(Q K^T / sqrt(d_k)) V over the last two axes.

    Returns ``(output, weights)``; leading axes are batch axes.
    """
    Q, K, V = _f64(Q), _f64(K), _f64(V)
    _check_attention_shapes(Q, K, V)
    scale = 1.0 / math.sqrt(Q.shape[-1])
    logits = matmul(Q, np.swapaxes(K, -1, -2)) * scale
    weights = softmax(logits, axis=-1)
    return matmul(weights, V), weights


def attention_backward(Q, K, V, dout) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    Q, K, V, dout = _f64(Q), _f64(K), _f64(V), _f64(dout)
    _check_attention_shapes(Q, K, V)
    expected = Q.shape[:-1] + (V.shape[-1],)
    if dout.shape != expected:
        raise ShapeMismatch(f"upstream gradient shape {dout.shape}, expected {expected}")
    scale = 1.0 / math.sqrt(Q.shape[-1])
    _, w = scaled_dot_attention(Q, K, V)
    dV = matmul(np.swapaxes(w, -1, -2), dout)
    dw = matmul(dout, np.swapaxes(V, -1, -2))
    dlogits = softmax_backward(w, dw) * scale
    dQ = matmul(dlogits, K)
    dK = matmul(np.swapaxes(dlogits, -1, -2), Q)
    return dQ, dK, dV


@dataclass(frozen=True)
class GradCheckReport:
    max_rel_error: float
    worst_index: tuple[int, ...]
    analytic: float
    numeric: float
    eps: float
    checked: int

    def passed(self, tol: float = 1e-4) -> bool:
        return self.max_rel_error < tol


def grad_check(
    f: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x,
    eps: float = 1e-3,
    coords: Iterable[tuple[int, ...]] | None = None,
) -> GradCheckReport:
    """Compare ``f``'s analytic gradient with central differences.

    ``f(x)`` must return ``(value, gradient)``. Relative error per coordinate
    is ``|a - n| / max(|a|, |n|, REL_FLOOR)``. ``coords`` restricts the check to a
    subset of indices; by default every coordinate is perturbed.
    """
    if not eps > 0:
        raise ValueError("eps must be > 0")
    x = np.array(x, dtype=np.float64)
    _, grad = f(x.copy())
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != x.shape:
        raise ShapeMismatch(f"gradient shape {grad.shape} != input shape {x.shape}")
    if coords is None:
        coords = np.ndindex(*x.shape)
    worst = (-1.0, (), 0.0, 0.0)
    count = 0
    for idx in coords:
        idx = tuple(int(i) for i in idx)
        orig = x[idx]
        x[idx] = orig + eps
        fp = float(f(x)[0])
        x[idx] = orig - eps
        fm = float(f(x)[0])
        x[idx] = orig
        num = (fp - fm) / (2.0 * eps)
        ana = float(grad[idx])
        rel = abs(ana - num) / max(abs(ana), abs(num), REL_FLOOR)
        if rel > worst[0]:
            worst = (rel, idx, ana, num)
        count += 1
    return GradCheckReport(max(worst[0], 0.0), worst[1], worst[2], worst[3], eps, count)
