"""Temporal-spatial attention over a latent video token grid.

A latent video has shape ``(n_frames, n_tokens, d_model)``. Three branches
read it:

* spatial: per frame, tokens attend to the other tokens of that frame;
* temporal: per token location, frames attend to the other frames, with
  sinusoidal frame-position codes added to the query/key inputs;
* cross-modal: every visual token queries the scene-graph entity embeddings.

Their outputs are blended with softmax-normalized weights. Each branch is a
multi-head attention without output projection; heads split ``d_model``
evenly. Every forward has a matching backward returning gradients for the
inputs and all projection matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyConditioning, ShapeMismatch
from .kernels import attention_backward, scaled_dot_attention, softmax, softmax_backward

BRANCHES = ("sa", "ta", "cma")


@dataclass
class BranchParams:
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray

    def arrays(self):
        return {"wq": self.wq, "wk": self.wk, "wv": self.wv}


@dataclass
class AttentionParams:
    sa: BranchParams
    ta: BranchParams
    cma: BranchParams
    heads: int = 4

    @property
    def d_model(self) -> int:
        return self.sa.wq.shape[0]

    def branch(self, name: str) -> BranchParams:
        return getattr(self, name)

    def validate(self) -> None:
        d = self.d_model
        if d % self.heads:
            raise ShapeMismatch(f"d_model {d} not divisible by {self.heads} heads")
        for name in BRANCHES:
            for key, w in self.branch(name).arrays().items():
                if w.shape != (d, d):
                    raise ShapeMismatch(f"{name}.{key} has shape {w.shape}, expected {(d, d)}")
                if not np.all(np.isfinite(w)):
                    raise ValueError(f"{name}.{key} has non-finite entries")

    @classmethod
    def init(cls, rng: np.random.Generator, d_model: int = 32, heads: int = 4) -> AttentionParams:
        std = 1.0 / np.sqrt(d_model)

        def branch():
            return BranchParams(*(rng.standard_normal((d_model, d_model)) * std for _ in range(3)))

        return cls(branch(), branch(), branch(), heads)


@dataclass
class TsamWeights:
    logits: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def weights(self) -> np.ndarray:
        return softmax(self.logits)


def positional_encoding(n: int, d: int) -> np.ndarray:
    """Sinusoidal codes, ``(n, d)``: sin on even channels, cos on odd."""
    pos = np.arange(n, dtype=np.float64)[:, None]
    i = np.arange(d // 2 + d % 2, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2.0 * i / d)
    pe = np.zeros((n, d))
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle[:, : d // 2])
    return pe


# -- multi-head attention core -------------------------------------------------


def _split(x: np.ndarray, heads: int) -> np.ndarray:
    *lead, n, d = x.shape
    return np.swapaxes(x.reshape(*lead, n, heads, d // heads), -2, -3)


def _merge(x: np.ndarray) -> np.ndarray:
    x = np.swapaxes(x, -2, -3)
    *lead, n, h, dk = x.shape
    return x.reshape(*lead, n, h * dk)


def multihead(xq, xk, xv, bp: BranchParams, heads: int):
    """Batched multi-head attention; returns ``(output, cache)``."""
    q = _split(xq @ bp.wq, heads)
    k = _split(xk @ bp.wk, heads)
    v = _split(xv @ bp.wv, heads)
    out, _ = scaled_dot_attention(q, k, v)
    return _merge(out), (xq, xk, xv, q, k, v, bp, heads)


def _sum_lead(x: np.ndarray, ndim: int) -> np.ndarray:
    return x.reshape(-1, *x.shape[-ndim:]).sum(axis=0) if x.ndim > ndim else x


def multihead_backward(cache, dout):
    xq, xk, xv, q, k, v, bp, heads = cache
    dq, dk, dv = attention_backward(q, k, v, _split(dout, heads))
    dq, dk, dv = _merge(dq), _merge(dk), _merge(dv)
    grads = {
        "wq": _sum_lead(np.swapaxes(xq, -1, -2) @ dq, 2),
        "wk": _sum_lead(np.swapaxes(xk, -1, -2) @ dk, 2),
        "wv": _sum_lead(np.swapaxes(xv, -1, -2) @ dv, 2),
    }
    return dq @ bp.wq.T, dk @ bp.wk.T, dv @ bp.wv.T, grads


# -- branches -----------------------------------------------------------------


def _check_latent(x: np.ndarray, p: AttentionParams) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ShapeMismatch(f"latent video must be (frames, tokens, channels), got {x.shape}")
    if x.shape[2] != p.d_model:
        raise ShapeMismatch(f"latent channels {x.shape[2]} != d_model {p.d_model}")
    return x


def spatial_forward(x, p: AttentionParams):
    x = _check_latent(x, p)
    return multihead(x, x, x, p.sa, p.heads)


def temporal_forward(x, p: AttentionParams, positional: bool = True):
    x = _check_latent(x, p)
    xt = np.swapaxes(x, 0, 1)  # (tokens, frames, d)
    xqk = xt + positional_encoding(x.shape[0], x.shape[2]) if positional else xt
    out, cache = multihead(xqk, xqk, xt, p.ta, p.heads)
    return np.swapaxes(out, 0, 1), cache


def cross_modal_forward(x, text, p: AttentionParams):
    x = _check_latent(x, p)
    text = np.asarray(text, dtype=np.float64)
    if text.size == 0:
        raise EmptyConditioning()
    if text.ndim != 2:
        raise ShapeMismatch(f"entity embeddings must be 2-D, got {text.shape}")
    if text.shape[1] != p.d_model:
        raise ShapeMismatch(f"entity embedding width {text.shape[1]} != d_model {p.d_model}")
    n, s, d = x.shape
    out, cache = multihead(x.reshape(1, n * s, d), text[None], text[None], p.cma, p.heads)
    return out.reshape(n, s, d), cache


def spatial_attention(x, p: AttentionParams) -> np.ndarray:
    return spatial_forward(x, p)[0]


def temporal_attention(x, p: AttentionParams, positional: bool = True) -> np.ndarray:
    return temporal_forward(x, p, positional)[0]


def cross_modal_attention(x, text_embeddings, p: AttentionParams) -> np.ndarray:
    return cross_modal_forward(x, text_embeddings, p)[0]


def tsam_combine(sa, ta, cma, w: TsamWeights) -> np.ndarray:
    sa, ta, cma = (np.asarray(a, dtype=np.float64) for a in (sa, ta, cma))
    if not (sa.shape == ta.shape == cma.shape):
        raise ShapeMismatch(f"branch shapes differ: {sa.shape}, {ta.shape}, {cma.shape}")
    a, b, c = w.weights
    return a * sa + b * ta + c * cma


# -- full block with backward -------------------------------------------------


def tsam_forward(x, text, p: AttentionParams, w: TsamWeights):
    sa, c_sa = spatial_forward(x, p)
    ta, c_ta = temporal_forward(x, p)
    cma, c_cma = cross_modal_forward(x, text, p)
    y = tsam_combine(sa, ta, cma, w)
    return y, (sa, ta, cma, c_sa, c_ta, c_cma, w, np.asarray(x).shape)


def tsam_backward(cache, dy):
    """Gradients of the combined block.

    Returns ``(dx, dtext, grads)`` where ``grads`` maps ``"sa"``, ``"ta"``,
    ``"cma"`` to projection gradients and ``"logits"`` to the mixing-logit
    gradient.
    """
    sa, ta, cma, c_sa, c_ta, c_cma, w, shape = cache
    weights = w.weights
    n, s, d = shape
    dweights = np.array([np.sum(dy * sa), np.sum(dy * ta), np.sum(dy * cma)])
    grads = {"logits": softmax_backward(weights, dweights)}

    dq, dk, dv, grads["sa"] = multihead_backward(c_sa, weights[0] * dy)
    dx = dq + dk + dv

    dq, dk, dv, grads["ta"] = multihead_backward(c_ta, np.swapaxes(weights[1] * dy, 0, 1))
    dx = dx + np.swapaxes(dq + dk + dv, 0, 1)

    dq, dk, dv, grads["cma"] = multihead_backward(c_cma, (weights[2] * dy).reshape(1, n * s, d))
    dx = dx + dq.reshape(n, s, d)
    dtext = (dk + dv)[0]
    return dx, dtext, grads
