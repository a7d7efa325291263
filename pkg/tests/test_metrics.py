import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scenevideo.errors import DimensionMismatch, InsufficientSamples, ZeroVector
from scenevideo.metrics import (
    REGULARIZER,
    GaussianSummary,
    alignment_score,
    corpus_summary,
    extract_features,
    format_report,
    frechet_distance,
    summarize,
    temporal_consistency,
)


def loop_covariance(x):
    n, d = x.shape
    mu = [sum(x[i, j] for i in range(n)) / n for j in range(d)]
    cov = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            cov[a, b] = sum((x[i, a] - mu[a]) * (x[i, b] - mu[b]) for i in range(n)) / (n - 1)
    return np.array(mu), cov


def random_summary(r, d=15):
    a = r.standard_normal((d, d))
    return GaussianSummary(r.standard_normal(d), a @ a.T / d + REGULARIZER * np.eye(d))


def test_constant_gray_features():
    f = extract_features(np.full((3, 8, 8, 3), 0.4))
    np.testing.assert_allclose(f[:, 0:3], 0.4)
    assert not f[:, 3:6].any() and not f[:, 14].any()
    np.testing.assert_array_equal(f[:, 6], 1.0)
    assert not f[:, 7:14].any()


def test_features_resolution_independent():
    small = np.full((2, 4, 4, 3), 0.3)
    small[:, :2] = 0.8
    big = small.repeat(2, axis=1).repeat(2, axis=2)
    np.testing.assert_allclose(extract_features(small)[:, :6], extract_features(big)[:, :6], atol=1e-12)


def test_histogram_normalized(rendered):
    f = extract_features(rendered[0])
    np.testing.assert_allclose(f[:, 6:14].sum(axis=1), 1.0)
    assert np.all(f[:, 6:14] >= 0)


def test_features_deterministic(rendered):
    assert extract_features(rendered[1]).tobytes() == extract_features(rendered[1].copy()).tobytes()


def test_shuffled_frame_diff_larger(rendered):
    r = np.random.default_rng(5)
    # smooth: every consecutive pair of frames differs
    smooth = [v for v in rendered if all(np.any(a != b) for a, b in zip(v, v[1:]))]
    assert len(smooth) >= 10
    for v in smooth[:10]:
        perm = r.permutation(len(v))
        while np.all(perm == np.arange(len(v))):
            perm = r.permutation(len(v))
        assert extract_features(v[perm])[1:, 14].mean() > extract_features(v)[1:, 14].mean()


def test_summarize_identical_vectors():
    s = summarize(np.tile(np.arange(4.0), (5, 1)))
    np.testing.assert_array_equal(s.mean, np.arange(4.0))
    np.testing.assert_allclose(s.cov, REGULARIZER * np.eye(4), atol=1e-18)


def test_summarize_symmetric_points():
    assert summarize(np.array([[-2.0], [2.0]])).mean[0] == 0.0


def test_summarize_loop_oracle(rng):
    x = rng.standard_normal((7, 5))
    mu, cov = loop_covariance(x)
    s = summarize(x)
    np.testing.assert_allclose(s.mean, mu, atol=1e-12)
    np.testing.assert_allclose(s.cov, cov + REGULARIZER * np.eye(5), atol=1e-12)


def test_summarize_needs_two():
    with pytest.raises(InsufficientSamples):
        summarize(np.ones((1, 3)))


def test_frechet_identity_and_closed_form(rng):
    s = random_summary(rng)
    assert abs(frechet_distance(s, s)) <= 1e-8
    a = GaussianSummary(np.array([0.0]), np.array([[0.7]]))
    b = GaussianSummary(np.array([1.0]), np.array([[0.7]]))
    assert frechet_distance(a, b) == pytest.approx(1.0, abs=1e-6)


def test_frechet_one_dim_unequal_variance():
    a = GaussianSummary(np.array([0.0]), np.array([[4.0]]))
    b = GaussianSummary(np.array([0.0]), np.array([[1.0]]))
    # (sigma_a - sigma_b)^2 with sigma = sqrt(variance)
    assert frechet_distance(a, b) == pytest.approx(1.0, abs=1e-9)


def test_frechet_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        frechet_distance(random_summary(rng, 3), random_summary(rng, 4))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_frechet_symmetric_nonnegative(seed):
    r = np.random.default_rng(seed)
    a, b = random_summary(r), random_summary(r)
    ab, ba = frechet_distance(a, b), frechet_distance(b, a)
    assert ab >= 0 and abs(ab - ba) <= 1e-8


def test_frechet_separation(rendered):
    r = np.random.default_rng(11)
    noise = [r.random(v.shape) for v in rendered[:10]]
    halves = frechet_distance(corpus_summary(rendered[:10]), corpus_summary(rendered[10:20]))
    vs_noise = frechet_distance(corpus_summary(rendered[:10]), corpus_summary(noise))
    assert halves < vs_noise


def test_temporal_consistency_examples(rendered):
    assert temporal_consistency(np.repeat(rendered[0][:1], 4, axis=0)) == 1.0
    r = np.random.default_rng(2)
    noise = r.standard_normal((8, 16, 16, 3)) * 10
    assert temporal_consistency(noise) < 0.01


def test_alignment_examples(scenes, rendered, lexicon):
    from scenevideo.objective import video_embedding
    from scenevideo.scene import graph_embedding

    g, v = scenes[0], rendered[0]
    score = alignment_score(g, v)
    assert -1 <= score <= 1
    # scaling pixels scales the video embedding: cosine unchanged
    assert alignment_score(g, 0.5 * v) == pytest.approx(score, abs=1e-12)
    assert np.dot(video_embedding(v), graph_embedding(g)) != 0


def test_alignment_zero_video(scenes):
    with pytest.raises(ZeroVector):
        alignment_score(scenes[0], np.zeros((2, 4, 4, 3)))


def test_report_format():
    text = format_report(1.0, None, 0.5)
    assert json.loads(text) == {"fvd_proxy": 1.0, "alignment": None, "temporal_consistency": 0.5}
    assert '"fvd_proxy": 1.000000' in text and '"temporal_consistency": 0.500000' in text
