"""Fixed, pretrained-network-free embeddings shared by the parser, loss and metrics.

Video and entity embeddings both live in ``EMBED_DIM`` dimensions. Colors are
lifted into that space by one fixed matrix, so a video whose mean color matches
a graph's entity colors scores a high cosine against that graph.
"""

from __future__ import annotations

import hashlib

import numpy as np

EMBED_DIM = 32
_LUMA_KEEP = 0.1


def _color_projection() -> np.ndarray:
    i = np.arange(EMBED_DIM, dtype=np.float64)[:, None]
    k = np.arange(1, 4, dtype=np.float64)[None, :]
    basis = np.sqrt(2.0 / EMBED_DIM) * np.cos(np.pi * (i + 0.5) * k / EMBED_DIM)
    # damp the gray axis so embeddings are dominated by chroma
    centering = np.eye(3) - (1.0 - _LUMA_KEEP) * np.full((3, 3), 1.0 / 3.0)
    return basis @ centering


COLOR_PROJECTION = _color_projection()  # EMBED_DIM x 3


def color_embedding(rgb) -> np.ndarray:
    return COLOR_PROJECTION @ np.asarray(rgb, dtype=np.float64)


def hash_vector(key: str, dim: int = EMBED_DIM) -> np.ndarray:
    """Deterministic vector in [-1, 1]^dim derived from a string."""
    out = np.empty(dim, dtype=np.float64)
    counter = 0
    filled = 0
    while filled < dim:
        digest = hashlib.blake2b(f"{key}#{counter}".encode("utf-8"), digest_size=64).digest()
        words = np.frombuffer(digest, dtype="<u2").astype(np.float64)
        take = min(dim - filled, words.size)
        out[filled : filled + take] = words[:take] / 65535.0 * 2.0 - 1.0
        filled += take
        counter += 1
    return out
