import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoseg.raster import (
    DimensionError,
    IntensityRaster,
    LabelMap,
    ProbabilityMap,
    argmax_labels,
    crop,
    pointwise_min,
)


def rand_raster(rng, w, h, channels=1):
    return IntensityRaster(rng.integers(0, 256, (channels, h, w), dtype=np.uint8))


class TestContainers:
    def test_intensity_invariants(self):
        r = IntensityRaster([[1, 2], [3, 4]])
        assert (r.width, r.height, r.channels) == (2, 2, 1)
        assert r.data.dtype == np.uint8

    def test_intensity_rejects_bad_channels(self):
        with pytest.raises(DimensionError):
            IntensityRaster(np.zeros((2, 4, 4), dtype=np.uint8))

    def test_intensity_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            IntensityRaster(np.full((1, 2, 2), 300))

    def test_immutable(self):
        r = IntensityRaster([[1, 2]])
        with pytest.raises(ValueError):
            r.data[0, 0, 0] = 5

    def test_label_map_values(self):
        LabelMap(np.array([[0, 1], [2, 3]]))
        with pytest.raises(ValueError):
            LabelMap(np.array([[0, 4]]))

    def test_probability_map_range(self):
        ProbabilityMap(np.full((3, 2, 2), 0.5))
        with pytest.raises(ValueError):
            ProbabilityMap(np.full((3, 2, 2), 1.5))
        with pytest.raises(DimensionError):
            ProbabilityMap(np.full((2, 2, 2), 0.5))


class TestPointwiseMin:
    def test_idempotent_case(self):
        a = IntensityRaster([[3, 7]])
        assert np.array_equal(pointwise_min(a, a).data, a.data)

    def test_zero_absorbs(self):
        a = IntensityRaster(np.zeros((1, 3, 3), dtype=np.uint8))
        b = IntensityRaster(np.full((1, 3, 3), 99, dtype=np.uint8))
        assert not pointwise_min(a, b).data.any()

    def test_elementwise(self):
        a = IntensityRaster([[3, 7]])
        b = IntensityRaster([[5, 2]])
        assert pointwise_min(a, b).data.tolist() == [[[3, 2]]]

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            pointwise_min(IntensityRaster([[1]]), IntensityRaster([[1, 2]]))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_commutative_associative_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (rand_raster(rng, 5, 4) for _ in range(3))
        ab = pointwise_min(a, b)
        assert np.array_equal(ab.data, pointwise_min(b, a).data)
        assert np.array_equal(
            pointwise_min(ab, c).data, pointwise_min(a, pointwise_min(b, c)).data
        )
        assert np.array_equal(pointwise_min(a, a).data, a.data)


class TestArgmaxLabels:
    def test_channel2_maximal(self):
        p = np.zeros((3, 2, 2))
        p[2] = 0.9
        assert (argmax_labels(ProbabilityMap(p)).data == 3).all()

    def test_tie_break_to_smallest(self):
        p = np.full((3, 2, 2), 1 / 3)
        assert (argmax_labels(ProbabilityMap(p)).data == 1).all()

    def test_single_pixel(self):
        p = np.array([0.2, 0.5, 0.3]).reshape(3, 1, 1)
        assert argmax_labels(ProbabilityMap(p)).data[0, 0] == 2

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_never_emits_zero(self, seed):
        rng = np.random.default_rng(seed)
        p = ProbabilityMap(rng.random((3, 6, 5)))
        assert (argmax_labels(p).data >= 1).all()


class TestCrop:
    def test_full_frame_identity(self):
        rng = np.random.default_rng(0)
        r = rand_raster(rng, 7, 5, channels=3)
        assert np.array_equal(crop(r, 0, 0, 7, 5).data, r.data)

    def test_single_pixel(self):
        r = IntensityRaster([[9, 1], [2, 3]])
        assert crop(r, 0, 0, 1, 1).data[0, 0, 0] == 9

    def test_known_window(self):
        grid = np.arange(16, dtype=np.uint8).reshape(1, 4, 4)
        out = crop(IntensityRaster(grid), 1, 2, 2, 2)
        assert out.data[0].tolist() == [[9, 10], [13, 14]]

    def test_label_map_crop(self):
        m = LabelMap(np.array([[1, 2], [3, 1]]))
        assert crop(m, 1, 0, 1, 2).data.tolist() == [[2], [1]]

    def test_out_of_bounds(self):
        r = IntensityRaster([[1, 2], [3, 4]])
        with pytest.raises(DimensionError):
            crop(r, 1, 1, 2, 2)
        with pytest.raises(DimensionError):
            crop(r, -1, 0, 1, 1)
