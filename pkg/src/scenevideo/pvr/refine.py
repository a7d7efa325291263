"""Coarse-to-fine generation: TSAM-conditioned residual refinement per level."""

from __future__ import annotations

import numpy as np

from ..errors import MissingAnnotations
from ..render import quantize
from ..rng import stream
from ..scene.graph import SceneGraph
from ..scene.relations import embedding_matrix
from ..tsam import tsam_backward, tsam_forward
from .model import LevelParams, LevelSpec, ModelParams, NoiseSchedule, check_level_input


def patchify(v: np.ndarray, patch: int) -> np.ndarray:
    """``(n, H, W, C)`` -> ``(n, tokens, patch*patch*C)``, tokens in row-major order."""
    n, h, w, c = v.shape
    x = v.reshape(n, h // patch, patch, w // patch, patch, c)
    return x.transpose(0, 1, 3, 2, 4, 5).reshape(n, (h // patch) * (w // patch), patch * patch * c)


def depatchify(x: np.ndarray, shape: tuple[int, int, int, int], patch: int) -> np.ndarray:
    n, h, w, c = shape
    x = x.reshape(n, h // patch, w // patch, patch, patch, c)
    return x.transpose(0, 1, 3, 2, 4, 5).reshape(n, h, w, c)


def _upsample_axis(v: np.ndarray, axis: int) -> np.ndarray:
    prev = np.roll(v, 1, axis=axis)
    nxt = np.roll(v, -1, axis=axis)
    even = 0.75 * v + 0.25 * prev
    odd = 0.75 * v + 0.25 * nxt
    out = np.stack([even, odd], axis=axis + 1)
    shape = list(v.shape)
    shape[axis] *= 2
    return out.reshape(shape)


def upsample(v, factor: int = 2) -> np.ndarray:
    """Bilinear 2x spatial upsampling with half-pixel centers and periodic wrap.

    Output pixel ``2k`` sits a quarter pixel before input ``k`` and ``2k+1`` a
    quarter after, so weights are 3/4 on the near input and 1/4 on its
    neighbour. Periodic borders make the per-frame mean exactly preserved.
    """
    if factor != 2:
        raise ValueError("only factor 2 is supported")
    v = np.asarray(v, dtype=np.float64)
    return _upsample_axis(_upsample_axis(v, 1), 2)


def refine_forward(v, text, lv: LevelParams, spec: LevelSpec, level: int):
    v = np.asarray(v, dtype=np.float64)
    check_level_input(v, spec, level)
    patches = patchify(v, spec.patch)
    tokens = patches @ lv.encode
    y, tcache = tsam_forward(tokens, text, lv.attention, lv.mixing)
    update = depatchify(y @ lv.decode, v.shape, spec.patch)
    out = v + lv.gain[0] * update
    return out, (v.shape, patches, y, update, tcache, lv, spec.patch)


def refine_backward(cache, dout):
    """Return ``(dv, dtext, grads)``; ``grads`` is keyed like ``LevelParams.arrays()``."""
    shape, patches, y, update, tcache, lv, patch = cache
    grads = {"gain": np.array([np.sum(dout * update)])}
    dz = patchify(lv.gain[0] * dout, patch)
    grads["decode"] = np.einsum("nsd,nsp->dp", y, dz)
    dy = dz @ lv.decode.T
    dtokens, dtext, tg = tsam_backward(tcache, dy)
    grads["encode"] = np.einsum("nsp,nsd->pd", patches, dtokens)
    for b in ("sa", "ta", "cma"):
        for k, g in tg[b].items():
            grads[f"{b}.{k}"] = g
    grads["logits"] = tg["logits"]
    dv = dout + depatchify(dtokens @ lv.encode.T, shape, patch)
    return dv, dtext, {name: grads[name] for name in lv.arrays()}


def refine_step(v, graph_embeddings, params: ModelParams, level: int) -> np.ndarray:
    """One residual update ``v + gain * decode(TSAM(encode(patches)))`` at ``level``."""
    return refine_forward(v, graph_embeddings, params.levels[level], params.spec, level)[0]


def initial_noise(seed: int, spec: LevelSpec, schedule: NoiseSchedule) -> np.ndarray:
    return schedule.sigmas[0] * stream(seed, "noise/0").standard_normal(spec.shape(0))


def generate(
    graph: SceneGraph,
    params: ModelParams,
    schedule: NoiseSchedule = NoiseSchedule(),
    seed: int = 0,
    rounds: int = 2,
) -> np.ndarray:
    """Refine seeded noise level by level; returns a float32 video clamped to [0, 1].

    Fresh noise scaled by the next level's sigma is added after each upsample;
    none after the last level.
    """
    spec = params.spec
    if len(schedule.sigmas) != spec.levels:
        raise ValueError(f"schedule has {len(schedule.sigmas)} levels, model has {spec.levels}")
    if not graph.annotations or len(graph.annotations) != len(graph.objects):
        raise MissingAnnotations()
    text = embedding_matrix(graph, rounds)
    v = initial_noise(seed, spec, schedule)
    for level in range(spec.levels):
        for _ in range(schedule.steps):
            v = refine_step(v, text, params, level)
        if level + 1 < spec.levels:
            v = upsample(v)
            noise = stream(seed, f"noise/{level + 1}").standard_normal(spec.shape(level + 1))
            v = v + schedule.sigmas[level + 1] * noise
    return quantize(v)
