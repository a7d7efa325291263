import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scenevideo.errors import EmptyConditioning, ShapeMismatch
from scenevideo.kernels import grad_check, scaled_dot_attention
from scenevideo.tsam import (
    AttentionParams,
    TsamWeights,
    cross_modal_attention,
    spatial_attention,
    temporal_attention,
    tsam_backward,
    tsam_combine,
    tsam_forward,
)


@pytest.fixture
def params():
    return AttentionParams.init(np.random.default_rng(7), d_model=32, heads=4)


def value_proj(x, bp):
    return x @ bp.wv


def test_single_frame_spatial_is_plain_attention(params, rng):
    x = rng.standard_normal((1, 5, 32))
    out = spatial_attention(x, params)
    # oracle: per-head attention assembled by hand
    bp = params.sa
    q, k, v = x[0] @ bp.wq, x[0] @ bp.wk, x[0] @ bp.wv
    heads = [scaled_dot_attention(q[:, h*8:(h+1)*8], k[:, h*8:(h+1)*8], v[:, h*8:(h+1)*8])[0] for h in range(4)]
    np.testing.assert_allclose(out[0], np.concatenate(heads, axis=1), atol=1e-12)


def test_identical_frames_identical_spatial_output(params, rng):
    frame = rng.standard_normal((1, 6, 32))
    out = spatial_attention(np.concatenate([frame, frame]), params)
    np.testing.assert_array_equal(out[0], out[1])


def test_spatial_frame_permutation(params, rng):
    x = rng.standard_normal((5, 4, 32))
    perm = rng.permutation(5)
    np.testing.assert_allclose(spatial_attention(x[perm], params), spatial_attention(x, params)[perm], atol=1e-12)


def test_temporal_single_frame(params, rng):
    x = rng.standard_normal((1, 4, 32))
    np.testing.assert_allclose(temporal_attention(x, params), value_proj(x, params.ta), atol=1e-12)


def test_temporal_static_video(params, rng):
    x = np.repeat(rng.standard_normal((1, 4, 32)), 6, axis=0)
    out = temporal_attention(x, params)
    for t in range(1, 6):
        np.testing.assert_allclose(out[t], out[0], atol=1e-12)


def test_temporal_equivariance_without_positions(params, rng):
    x = rng.standard_normal((6, 3, 32))
    perm = rng.permutation(6)
    a = temporal_attention(x[perm], params, positional=False)
    b = temporal_attention(x, params, positional=False)[perm]
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_positions_break_equivariance(params, rng):
    x = rng.standard_normal((6, 3, 32))
    perm = np.array([1, 0, 2, 3, 4, 5])
    a = temporal_attention(x[perm], params)
    b = temporal_attention(x, params)[perm]
    assert not np.allclose(a, b)


def test_cross_modal_single_entity(params, rng):
    x = rng.standard_normal((2, 3, 32))
    text = rng.standard_normal((1, 32))
    out = cross_modal_attention(x, text, params)
    np.testing.assert_allclose(out, np.broadcast_to(text @ params.cma.wv, out.shape), atol=1e-12)


def test_cross_modal_duplicate_entity(params, rng):
    x = rng.standard_normal((2, 3, 32))
    text = rng.standard_normal((3, 32))
    a = cross_modal_attention(x, text, params)
    b = cross_modal_attention(x, np.vstack([text, text]), params)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_cross_modal_zero_query_uniform(params, rng):
    text = rng.standard_normal((4, 32))
    out = cross_modal_attention(np.zeros((2, 3, 32)), text, params)
    expected = (text @ params.cma.wv).mean(axis=0)
    np.testing.assert_allclose(out, np.broadcast_to(expected, out.shape), atol=1e-12)


def test_cross_modal_errors(params, rng):
    x = rng.standard_normal((2, 3, 32))
    with pytest.raises(EmptyConditioning):
        cross_modal_attention(x, np.zeros((0, 32)), params)
    with pytest.raises(ShapeMismatch):
        cross_modal_attention(x, np.zeros((2, 16)), params)


def test_shape_preserved(params, rng):
    x = rng.standard_normal((3, 5, 32))
    y, _ = tsam_forward(x, rng.standard_normal((2, 32)), params, TsamWeights())
    assert y.shape == x.shape


def test_branch_isolation(params, rng):
    x = rng.standard_normal((4, 5, 32))
    base_s, base_t = spatial_attention(x, params), temporal_attention(x, params)
    y = x.copy()
    y[2, 3] += 1.0
    ds = np.abs(spatial_attention(y, params) - base_s).sum(axis=(1, 2))
    dt = np.abs(temporal_attention(y, params) - base_t).sum(axis=(0, 2))
    assert ds[2] > 0 and np.all(np.delete(ds, 2) == 0)
    assert dt[3] > 0 and np.all(np.delete(dt, 3) == 0)


def test_combine_examples(rng):
    sa, ta, cma = rng.standard_normal((3, 2, 3, 4))
    np.testing.assert_allclose(tsam_combine(sa, ta, cma, TsamWeights(np.array([50.0, -50, -50]))), sa, atol=1e-6)
    np.testing.assert_allclose(tsam_combine(sa, ta, cma, TsamWeights(np.zeros(3))), (sa + ta + cma) / 3, atol=1e-6)
    x = rng.standard_normal((2, 3, 4))
    np.testing.assert_allclose(tsam_combine(x, x, x, TsamWeights(rng.standard_normal(3))), x, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.1, 20))
def test_combine_convex_hull(seed, scale):
    r = np.random.default_rng(seed)
    sa, ta, cma = r.standard_normal((3, 2, 3, 4))
    y = tsam_combine(sa, ta, cma, TsamWeights(scale * r.standard_normal(3)))
    stack = np.stack([sa, ta, cma])
    assert np.all(y >= stack.min(axis=0) - 1e-12) and np.all(y <= stack.max(axis=0) + 1e-12)


def test_end_to_end_gradients(rng):
    """Combined block gradients against finite differences for every projection."""
    p = AttentionParams.init(rng, d_model=8, heads=2)
    w = TsamWeights(rng.standard_normal(3))
    x = rng.standard_normal((3, 4, 8))
    text = rng.standard_normal((2, 8))
    R = rng.standard_normal(x.shape)

    def loss_and_grads():
        y, cache = tsam_forward(x, text, p, w)
        return float(np.sum(y * R)), tsam_backward(cache, R)

    for branch in ("sa", "ta", "cma"):
        for key in ("wq", "wk", "wv"):
            bp = p.branch(branch)

            def f(m, bp=bp, key=key, branch=branch):
                setattr(bp, key, m)
                value, (_, _, grads) = loss_and_grads()
                return value, grads[branch][key]

            base = getattr(bp, key).copy()
            assert grad_check(f, base).max_rel_error < 1e-4, (branch, key)
            setattr(bp, key, base)

    def fx(z):
        nonlocal x
        x = z
        value, (dx, _, _) = loss_and_grads()
        return value, dx

    x0 = x.copy()
    assert grad_check(fx, x0).max_rel_error < 1e-4
    x = x0

    def ft(z):
        nonlocal text
        text = z
        value, (_, dtext, _) = loss_and_grads()
        return value, dtext

    assert grad_check(ft, text.copy()).max_rel_error < 1e-4

    def fl(z):
        w.logits = z
        value, (_, _, grads) = loss_and_grads()
        return value, grads["logits"]

    assert grad_check(fl, w.logits.copy()).max_rel_error < 1e-4
