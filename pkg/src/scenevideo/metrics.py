"""Pretrained-network-free evaluation metrics.

* ``frechet_distance`` between Gaussian summaries of hand-built frame features
  (the distribution-distance used for the FVD-style score);
* ``alignment_score``: cosine between the graph embedding and the video's
  color embedding;
* ``temporal_consistency``: 1 / (1 + mean squared first frame difference).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InsufficientSamples, ShapeMismatch
from .objective import cosine, video_embedding
from .scene.graph import SceneGraph
from .scene.relations import graph_embedding

FEATURE_DIM = 15
HIST_BINS = 8
HIST_RANGE = (0.0, np.sqrt(2.0))
REGULARIZER = 1e-6


def _video(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 4 or v.shape[-1] != 3 or min(v.shape) < 1:
        raise ShapeMismatch(f"video must be (frames, H, W, 3), got {v.shape}")
    return v


def gradient_magnitude(frame: np.ndarray) -> np.ndarray:
    """Forward-difference gradient magnitude of the gray image (replicated border)."""
    gray = frame.mean(axis=-1)
    gx = np.diff(gray, axis=1, append=gray[:, -1:])
    gy = np.diff(gray, axis=0, append=gray[-1:, :])
    return np.sqrt(gx * gx + gy * gy)


def extract_features(v) -> np.ndarray:
    """Per-frame features, ``(frames, 15)``.

    Columns: channel means (3), channel standard deviations (3), normalized
    gradient-magnitude histogram (8 bins over [0, sqrt 2]), mean absolute
    difference to the previous frame (0 for the first frame).
    """
    v = _video(v)
    feats = np.zeros((v.shape[0], FEATURE_DIM))
    edges = np.linspace(*HIST_RANGE, HIST_BINS + 1)
    for t, frame in enumerate(v):
        feats[t, 0:3] = frame.mean(axis=(0, 1))
        # shift by one pixel first so constant frames give exactly zero
        d = frame - frame[0, 0]
        d = d - d.mean(axis=(0, 1))
        feats[t, 3:6] = np.sqrt((d * d).mean(axis=(0, 1)))
        mag = gradient_magnitude(frame).ravel()
        bins = np.clip(np.searchsorted(edges, mag, side="right") - 1, 0, HIST_BINS - 1)
        feats[t, 6:14] = np.bincount(bins, minlength=HIST_BINS) / mag.size
        if t:
            feats[t, 14] = np.mean(np.abs(frame - v[t - 1]))
    return feats


def video_feature(v) -> np.ndarray:
    """One vector per video: the mean of its frame features."""
    return extract_features(v).mean(axis=0)


@dataclass(frozen=True)
class GaussianSummary:
    mean: np.ndarray
    cov: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def summarize(features) -> GaussianSummary:
    """Sample mean and (n-1)-normalized covariance plus ``REGULARIZER * I``."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatch(f"features must be (samples, dim), got {x.shape}")
    if x.shape[0] < 2:
        raise InsufficientSamples(x.shape[0])
    mu = x.mean(axis=0)
    centered = x - mu
    cov = centered.T @ centered / (x.shape[0] - 1)
    cov = 0.5 * (cov + cov.T) + REGULARIZER * np.eye(x.shape[1])
    return GaussianSummary(mu, cov)


def _sqrtm_psd(a: np.ndarray) -> np.ndarray:
    a = 0.5 * (a + a.T)
    w, q = np.linalg.eigh(a)
    return (q * np.sqrt(np.clip(w, 0.0, None))) @ q.T


def frechet_distance(a: GaussianSummary, b: GaussianSummary) -> float:
    """Squared Frechet distance between two Gaussians.

    The cross term uses the symmetric form sqrt(A^1/2 B A^1/2), whose trace
    equals that of sqrt(A B) but stays real and PSD numerically.
    """
    if a.dim != b.dim or a.cov.shape != b.cov.shape:
        raise DimensionMismatch(f"summary dimensions differ: {a.dim} vs {b.dim}")
    diff = a.mean - b.mean
    sa = _sqrtm_psd(a.cov)
    cross = _sqrtm_psd(sa @ b.cov @ sa)
    d2 = float(diff @ diff + np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.trace(cross))
    if d2 < -1e-8:
        raise ArithmeticError(f"negative Frechet distance {d2}")
    return max(d2, 0.0)


def corpus_summary(videos) -> GaussianSummary:
    return summarize(np.stack([video_feature(v) for v in videos]))


def fvd_proxy(generated, reference) -> float:
    return frechet_distance(corpus_summary(generated), corpus_summary(reference))


def alignment_score(graph: SceneGraph, v, rounds: int = 2) -> float:
    return cosine(video_embedding(_video(v)), graph_embedding(graph, rounds))


def temporal_consistency(v) -> float:
    v = _video(v)
    if v.shape[0] < 2:
        raise ShapeMismatch("temporal consistency needs at least 2 frames")
    return 1.0 / (1.0 + float(np.mean((v[1:] - v[:-1]) ** 2)))


def format_report(fvd: float, alignment: float | None, consistency: float) -> str:
    """JSON report with every number printed to exactly 6 decimal places."""
    def num(x):
        return "null" if x is None else f"{x:.6f}"

    return (
        "{"
        f'"fvd_proxy": {num(fvd)}, '
        f'"alignment": {num(alignment)}, '
        f'"temporal_consistency": {num(consistency)}'
        "}"
    )
