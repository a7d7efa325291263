"""Joint toy training: denoise rendered ground truth with one refine step."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import MissingAnnotations
from ..objective import LossBreakdown, LossWeights, composite_loss
from ..render import render_scene
from ..rng import stream
from ..scene.graph import SceneGraph
from ..scene.relations import embedding_matrix
from .model import ModelParams, NoiseSchedule
from .refine import refine_backward, refine_forward

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 200
    learning_rate: float = 1e-2
    seed: int = 42
    weights: LossWeights = field(default_factory=LossWeights)
    schedule: NoiseSchedule = field(default_factory=NoiseSchedule)
    rounds: int = 2

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.learning_rate >= 0:
            raise ValueError("learning rate must be >= 0")


def level_sequence(seed: int, steps: int, levels: int) -> list[int]:
    """Random level per step, drawn as shuffled blocks so every block covers each level once."""
    rng = stream(seed, "train/levels")
    out: list[int] = []
    while len(out) < steps:
        out.extend(int(i) for i in rng.permutation(levels))
    return out[:steps]


def training_step(v_clean, text, graph_emb, params: ModelParams, level: int, sigma: float, noise, weights):
    """Loss breakdown and parameter gradients for one corrupted sample."""
    lv = params.levels[level]
    noisy = v_clean + sigma * noise
    out, cache = refine_forward(noisy, text, lv, params.spec, level)
    breakdown, dout = composite_loss(out, v_clean, graph_emb, weights)
    _, _, grads = refine_backward(cache, dout)
    return breakdown, grads


def train(scenes: list[SceneGraph], params: ModelParams, config: TrainConfig = TrainConfig()):
    """Plain gradient descent; returns ``(trained_params, history)``.

    The input ``params`` is not modified. Each step picks a scene and a
    level, renders the scene at that level's resolution, corrupts it with the
    level's noise, runs one refine step, and descends the composite loss.
    """
    if not scenes:
        raise ValueError("need at least one scene")
    spec = params.spec
    if len(config.schedule.sigmas) != spec.levels:
        raise ValueError("noise schedule and model disagree on level count")
    for g in scenes:
        if len(g.annotations) != len(g.objects):
            raise MissingAnnotations(f"scene {g.prompt!r} is not annotated")
    params = params.copy()
    texts = [embedding_matrix(g, config.rounds) for g in scenes]
    renders: dict[tuple[int, int], np.ndarray] = {}
    levels = level_sequence(config.seed, config.steps, spec.levels)
    scene_rng = stream(config.seed, "train/scenes")
    noise_rng = stream(config.seed, "train/noise")
    history: list[LossBreakdown] = []
    for step, level in enumerate(levels):
        idx = int(scene_rng.integers(len(scenes)))
        key = (idx, level)
        if key not in renders:
            h, w = spec.resolutions[level]
            renders[key] = render_scene(scenes[idx], h, w, spec.frames).astype(np.float64)
        clean = renders[key]
        noise = noise_rng.standard_normal(clean.shape)
        breakdown, grads = training_step(
            clean, texts[idx], texts[idx].mean(axis=0), params, level,
            config.schedule.sigmas[level], noise, config.weights,
        )
        history.append(breakdown)
        lv = params.levels[level]
        for name, arr in lv.arrays().items():
            lv.set(name, arr - config.learning_rate * grads[name])
        if step % 50 == 0:
            log.debug("step %d level %d composite %.6f", step, level, breakdown.composite)
    return params, history


def smoothed(values, window: int) -> np.ndarray:
    """Trailing moving average (shorter windows at the start)."""
    values = np.asarray(values, dtype=np.float64)
    csum = np.concatenate([[0.0], np.cumsum(values)])
    idx = np.arange(1, values.size + 1)
    lo = np.maximum(0, idx - window)
    return (csum[idx] - csum[lo]) / (idx - lo)
