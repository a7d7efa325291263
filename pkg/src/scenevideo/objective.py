"""Composite training objective and its gradient with respect to the video.

    composite = recon + temporal_weight * temporal + semantic_weight * semantic

recon is pixel MSE, temporal penalizes frame-to-frame acceleration (second
differences, so constant-velocity motion is free), semantic is one minus the
cosine between the video's color embedding and the graph embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import COLOR_PROJECTION
from .errors import ShapeMismatch, ZeroVector


@dataclass(frozen=True)
class LossWeights:
    temporal: float = 0.5
    semantic: float = 0.1
    adversarial: float = 0.0

    def __post_init__(self):
        for name in ("temporal", "semantic", "adversarial"):
            v = getattr(self, name)
            if not (v >= 0 and np.isfinite(v)):
                raise ValueError(f"loss weight {name} must be a finite value >= 0")
        if self.adversarial != 0:
            raise ValueError("adversarial loss is not implemented; its weight must be 0")


@dataclass(frozen=True)
class LossBreakdown:
    recon: float
    temporal: float
    semantic: float
    composite: float


def _video(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 4:
        raise ShapeMismatch(f"video must be (frames, H, W, C), got {v.shape}")
    return v


def recon_loss(v, target) -> float:
    v, target = _video(v), _video(target)
    if v.shape != target.shape:
        raise ShapeMismatch(f"video shapes differ: {v.shape} vs {target.shape}")
    return float(np.mean((v - target) ** 2))


def recon_grad(v, target) -> np.ndarray:
    v, target = _video(v), _video(target)
    return 2.0 * (v - target) / v.size


def _second_diff(v: np.ndarray) -> np.ndarray:
    return v[2:] - 2.0 * v[1:-1] + v[:-2]


def temporal_loss(v) -> float:
    v = _video(v)
    if v.shape[0] < 3:
        return 0.0
    return float(np.mean(_second_diff(v) ** 2))


def temporal_grad(v) -> np.ndarray:
    v = _video(v)
    g = np.zeros_like(v)
    if v.shape[0] < 3:
        return g
    a = 2.0 * _second_diff(v) / (v[2:].size)
    g[2:] += a
    g[1:-1] -= 2.0 * a
    g[:-2] += a
    return g


def video_embedding(v) -> np.ndarray:
    """Channel means pooled over frames and pixels, lifted by the fixed color projection."""
    v = _video(v)
    if v.shape[-1] != 3:
        raise ShapeMismatch(f"video must have 3 channels, got {v.shape[-1]}")
    return COLOR_PROJECTION @ v.mean(axis=(0, 1, 2))


def video_embedding_backward(v_shape, d_embed) -> np.ndarray:
    n, h, w, c = v_shape
    per_channel = COLOR_PROJECTION.T @ d_embed / (n * h * w)
    return np.broadcast_to(per_channel, v_shape).copy()


def _cosine_parts(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeMismatch(f"embeddings must be equal-length vectors: {a.shape} vs {b.shape}")
    na, nb = np.sqrt(a @ a), np.sqrt(b @ b)
    if na == 0:
        raise ZeroVector("video embedding")
    if nb == 0:
        raise ZeroVector("graph embedding")
    return a, b, na, nb


def cosine(a, b) -> float:
    a, b, na, nb = _cosine_parts(a, b)
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))


def semantic_loss(video_emb, graph_emb) -> float:
    return 1.0 - cosine(video_emb, graph_emb)


def semantic_grad(video_emb, graph_emb) -> np.ndarray:
    """Gradient of ``semantic_loss`` with respect to the video embedding."""
    a, b, na, nb = _cosine_parts(video_emb, graph_emb)
    cos = (a @ b) / (na * nb)
    return -(b / (na * nb) - cos * a / (na * na))


def composite_loss(v, target, graph_emb, weights: LossWeights = LossWeights()):
    """Return ``(LossBreakdown, dL/dv)``."""
    v, target = _video(v), _video(target)
    if v.shape != target.shape:
        raise ShapeMismatch(f"video shapes differ: {v.shape} vs {target.shape}")
    rec = recon_loss(v, target)
    tem = temporal_loss(v)
    emb = video_embedding(v)
    sem = semantic_loss(emb, graph_emb)
    total = rec + weights.temporal * tem + weights.semantic * sem
    grad = recon_grad(v, target)
    if weights.temporal:
        grad += weights.temporal * temporal_grad(v)
    if weights.semantic:
        grad += weights.semantic * video_embedding_backward(v.shape, semantic_grad(emb, graph_emb))
    return LossBreakdown(rec, tem, sem, total), grad
