import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scenevideo.errors import ShapeMismatch, ZeroVector
from scenevideo.objective import (
    LossWeights,
    composite_loss,
    recon_loss,
    semantic_loss,
    temporal_loss,
    video_embedding,
)
from scenevideo.render import render_scene


def loop_mse(a, b):
    total, count = 0.0, 0
    for x, y in zip(a.ravel(), b.ravel()):
        total += (x - y) ** 2
        count += 1
    return total / count


def test_recon_examples(rng):
    v = rng.random((2, 3, 3, 3))
    assert recon_loss(v, v) == 0.0
    assert recon_loss(np.zeros_like(v), np.ones_like(v)) == 1.0
    w = rng.random(v.shape)
    assert recon_loss(v, w) == pytest.approx(loop_mse(v, w), rel=1e-12)


def test_recon_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        recon_loss(np.zeros((2, 2, 2, 3)), np.zeros((2, 2, 3, 3)))


def test_temporal_static(rng):
    frame = rng.random((8, 8, 3))
    assert temporal_loss(np.repeat(frame[None], 5, axis=0)) == 0.0


def test_temporal_constant_velocity(rng):
    frame = rng.random((8, 8, 3))
    step = rng.standard_normal((8, 8, 3)) * 0.01
    v = np.stack([frame + t * step for t in range(6)])
    assert temporal_loss(v) == pytest.approx(0.0, abs=1e-28)


def test_temporal_periodic_translation():
    # a period-2 stripe pattern moving two pixels per frame wraps onto itself
    stripes = np.broadcast_to((np.arange(8) % 2)[None, :, None], (4, 8, 3)).astype(float)
    v = np.stack([np.roll(stripes, 2 * t, axis=1) for t in range(5)])
    assert temporal_loss(v) == 0.0


def test_temporal_shuffled_not_smaller(scenes, rendered):
    rng = np.random.default_rng(3)
    for v in rendered[:10]:
        perm = rng.permutation(v.shape[0])
        assert temporal_loss(v[perm]) >= temporal_loss(v) - 1e-12


def test_temporal_invariant_to_constant_image(rng):
    v = rng.random((5, 4, 4, 3))
    c = rng.random((4, 4, 3))
    assert temporal_loss(v + c) == pytest.approx(temporal_loss(v), rel=1e-9)


def test_semantic_examples(rng):
    a = rng.standard_normal(32)
    b = rng.standard_normal(32)
    b -= (a @ b) / (a @ a) * a
    assert semantic_loss(a, a) == pytest.approx(0.0, abs=1e-12)
    assert semantic_loss(a, b) == pytest.approx(1.0, abs=1e-12)
    assert semantic_loss(a, -a) == pytest.approx(2.0, abs=1e-12)


def test_semantic_scale_invariant(rng):
    a, b = rng.standard_normal((2, 32))
    assert semantic_loss(3.7 * a, 0.2 * b) == pytest.approx(semantic_loss(a, b), abs=1e-12)


def test_semantic_zero_vector():
    with pytest.raises(ZeroVector):
        semantic_loss(np.zeros(32), np.ones(32))


def test_composite_weight_zeroing(rng):
    v, t = rng.random((2, 4, 4, 4, 3))
    b, _ = composite_loss(v, t, rng.standard_normal(32), LossWeights(0.0, 0.0))
    assert b.composite == b.recon


def test_composite_global_minimum(rng):
    frame = rng.random((4, 4, 3))
    v = np.repeat(frame[None], 3, axis=0)
    b, g = composite_loss(v, v, video_embedding(v), LossWeights())
    assert b.composite == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(g, 0.0, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(l1=st.floats(0, 5), l2=st.floats(0, 5), seed=st.integers(0, 1000))
def test_composite_linear_and_nonnegative(l1, l2, seed):
    r = np.random.default_rng(seed)
    v, t = r.random((2, 4, 4, 4, 3))
    emb = r.standard_normal(32)
    b, _ = composite_loss(v, t, emb, LossWeights(l1, l2))
    assert min(b.recon, b.temporal, b.semantic) >= 0
    assert b.composite == pytest.approx(b.recon + l1 * b.temporal + l2 * b.semantic, rel=1e-12)


def test_adversarial_weight_rejected():
    with pytest.raises(ValueError):
        LossWeights(adversarial=0.1)
