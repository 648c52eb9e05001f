import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from geoseg.loss import LossConfig, jaccard_loss, jaccard_loss_grad, multichannel_loss
from geoseg.raster import DimensionError, LabelMap, ProbabilityMap

unit_vectors = arrays(
    np.float64,
    st.integers(1, 40),
    elements=st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False),
)


def finite_difference(x, y, eps, h=1e-5):
    g = np.empty_like(x)
    for i in range(x.size):
        hi, lo = x.copy(), x.copy()
        hi[i] += h
        lo[i] -= h
        g[i] = (jaccard_loss(hi, y, eps) - jaccard_loss(lo, y, eps)) / (2 * h)
    return g


class TestJaccardLoss:
    def test_identical_vectors_zero(self):
        assert jaccard_loss([0.3, 0.7, 1.0], [0.3, 0.7, 1.0]) == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_supports(self):
        assert jaccard_loss([1, 0], [0, 1], eps=1e-7) == pytest.approx(1 - 1e-7 / (2 + 1e-7))

    def test_half_versus_one(self):
        assert jaccard_loss([0.5], [1.0], eps=0.0) == pytest.approx(1 / 3)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            jaccard_loss([0.5], [0.5, 0.5])

    def test_range_enforced(self):
        with pytest.raises(ValueError):
            jaccard_loss([1.5], [0.5])
        with pytest.raises(ValueError):
            jaccard_loss([0.5], [-0.1])

    def test_config_validates_epsilon(self):
        with pytest.raises(ValueError):
            LossConfig(epsilon=0.0)

    @given(unit_vectors.flatmap(lambda x: st.tuples(st.just(x), arrays(np.float64, x.size, elements=st.floats(0, 1)))))
    @settings(max_examples=60, deadline=None)
    def test_symmetry_and_range(self, pair):
        x, y = pair
        a = jaccard_loss(x, y)
        assert a == jaccard_loss(y, x)
        assert 0.0 <= a < 1.0


class TestJaccardGrad:
    def test_identical_vectors_zero_grad(self):
        g = jaccard_loss_grad([0.2, 0.9], [0.2, 0.9], eps=1e-7)
        assert np.allclose(g, 0.0, atol=1e-9)

    def test_hand_computed(self):
        g = jaccard_loss_grad([0.5], [1.0], eps=0.0)
        assert g[0] == pytest.approx(-4 / 3)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 30))
        x = rng.uniform(0.01, 0.99, n)
        y = rng.uniform(0.0, 1.0, n)
        eps = 1e-7
        analytic = jaccard_loss_grad(x, y, eps)
        fd = finite_difference(x, y, eps)
        assert np.all(np.abs(analytic - fd) <= 1e-6 * np.maximum(1.0, np.abs(fd)))


class TestMultichannelLoss:
    def test_exact_one_hot_is_zero(self):
        g = LabelMap(np.array([[1, 2], [3, 1]]))
        p = np.zeros((3, 2, 2))
        for k in range(3):
            p[k] = g.data == k + 1
        assert multichannel_loss(ProbabilityMap(p), g) == pytest.approx(0.0, abs=1e-6)

    def test_uniform_on_all_label1(self):
        n = 12
        g = LabelMap(np.ones((3, 4), dtype=np.uint8))
        p = ProbabilityMap(np.full((3, 3, 4), 1 / 3))
        eps = 1e-7
        # channel 0: S = n/3, Q = n/9 + n - n/3; channels 1-2: S = 0, Q = n/9
        c0 = 1 - (n / 3 + eps) / (n / 9 + n - n / 3 + eps)
        c12 = 1 - eps / (n / 9 + eps)
        assert multichannel_loss(p, g, eps) == pytest.approx((c0 + 2 * c12) / 3, rel=1e-12)

    def test_equals_mean_of_channels(self):
        rng = np.random.default_rng(8)
        g = LabelMap(rng.integers(1, 4, (5, 6), dtype=np.uint8))
        raw = rng.random((3, 5, 6))
        p = ProbabilityMap(raw / raw.sum(axis=0, keepdims=True))
        per_channel = [
            jaccard_loss(p.data[k].ravel(), (g.data == k + 1).astype(float).ravel())
            for k in range(3)
        ]
        assert multichannel_loss(p, g) == pytest.approx(np.mean(per_channel), rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            multichannel_loss(ProbabilityMap(np.zeros((3, 2, 2))), LabelMap(np.ones((3, 3), dtype=np.uint8)))
