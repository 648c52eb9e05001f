import json
import warnings

import numpy as np
import pytest

from geoseg.classifier import (
    LocalWindowClassifier,
    _feature_planes,
    _loss_and_grad,
    extract_features,
    load_model,
    predict,
    save_model,
    segment,
    train,
)
from geoseg.raster import DimensionError, IntensityRaster, LabelMap
from geoseg.tiling import Crop


def rgb(rng, w, h):
    return IntensityRaster(rng.integers(0, 256, (3, h, w), dtype=np.uint8))


def toy_crop(rng, size=24):
    """Left half dark (label 1), right half bright (label 2): separable."""
    img = np.empty((3, size, size), dtype=np.uint8)
    img[:, :, : size // 2] = rng.integers(30, 60, (3, size, size // 2))
    img[:, :, size // 2 :] = rng.integers(180, 220, (3, size, size - size // 2))
    gt = np.ones((size, size), dtype=np.uint8)
    gt[:, size // 2 :] = 2
    return Crop(0, 0, IntensityRaster(img), LabelMap(gt))


class TestFeatures:
    def test_constant_image(self):
        img = IntensityRaster(np.full((3, 9, 9), 120, dtype=np.uint8))
        f = extract_features(img, 4, 4, radius=2)
        expected_channel = [120 / 255, 120 / 255, 0.0, 120 / 255, 120 / 255]
        assert f.tolist() == expected_channel * 3

    def test_corner_clipping(self):
        arr = np.zeros((1, 6, 6), dtype=np.uint8)
        arr[0, :2, :2] = [[10, 20], [30, 40]]
        img = IntensityRaster(arr)
        f = extract_features(img, 0, 0, radius=1)
        window = np.array([10, 20, 30, 40])
        assert f[1] == pytest.approx(window.mean() / 255)
        assert f[3] == 10 / 255
        assert f[4] == 40 / 255

    def test_hand_computed_window(self):
        arr = np.array([[1, 2, 3], [4, 5, 6], [7, 8, 9]], dtype=np.uint8)
        img = IntensityRaster(arr[np.newaxis])
        f = extract_features(img, 1, 1, radius=1)
        vals = np.arange(1, 10, dtype=np.float64)
        assert f[0] == 5 / 255
        assert f[1] == pytest.approx(vals.mean() / 255)
        assert f[2] == pytest.approx(np.sqrt(((vals - 5) ** 2).mean()) / 255)
        assert f[3] == 1 / 255 and f[4] == 9 / 255

    def test_outside_frame_rejected(self):
        img = IntensityRaster(np.zeros((1, 4, 4), dtype=np.uint8))
        with pytest.raises(DimensionError):
            extract_features(img, 4, 0, radius=1)

    def test_planes_match_single_pixel_path(self):
        rng = np.random.default_rng(0)
        img = rgb(rng, 15, 11)
        planes = _feature_planes(img, 3)
        for _ in range(40):
            x, y = int(rng.integers(0, 15)), int(rng.integers(0, 11))
            assert np.array_equal(extract_features(img, x, y, 3), planes[:, y, x])


class TestPredict:
    def test_zero_weights_uniform_with_warning(self):
        clf = LocalWindowClassifier(radius=2, channels=3)
        rng = np.random.default_rng(1)
        with pytest.warns(UserWarning, match="all zero"):
            pm = predict(clf, rgb(rng, 6, 5))
        assert np.allclose(pm.data, 1 / 3)

    def test_dominant_weights_saturate(self):
        w = np.zeros((3, 16))
        w[0, -1] = 50.0
        clf = LocalWindowClassifier(radius=2, channels=3, weights=w)
        rng = np.random.default_rng(2)
        pm = predict(clf, rgb(rng, 5, 4))
        assert pm.data[0].min() > 0.999

    def test_channels_sum_to_one(self):
        rng = np.random.default_rng(3)
        clf = LocalWindowClassifier(radius=2, channels=3, weights=rng.standard_normal((3, 16)))
        pm = predict(clf, rgb(rng, 8, 9))
        assert np.abs(pm.data.sum(axis=0) - 1.0).max() < 1e-9

    def test_channel_mismatch_rejected(self):
        clf = LocalWindowClassifier(radius=2, channels=1)
        rng = np.random.default_rng(4)
        with pytest.raises(DimensionError):
            predict(clf, rgb(rng, 4, 4))

    def test_receptive_field_bound(self):
        rng = np.random.default_rng(5)
        img = rgb(rng, 20, 20)
        clf = LocalWindowClassifier(radius=4, channels=3, weights=rng.standard_normal((3, 16)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            base = predict(clf, img)
        px, py = 10, 9
        for _ in range(25):
            while True:
                x, y = rng.integers(0, 20, 2)
                if max(abs(int(x) - px), abs(int(y) - py)) > 4:
                    break
            arr = img.data.copy()
            c = int(rng.integers(0, 3))
            arr[c, y, x] = (int(arr[c, y, x]) + 128) % 256
            probed = predict(clf, IntensityRaster(arr))
            assert np.array_equal(base.data[:, py, px], probed.data[:, py, px])


class TestTrain:
    def test_empty_crops_rejected(self):
        clf = LocalWindowClassifier()
        with pytest.raises(ValueError, match="at least one"):
            train(clf, [], epochs=1, learning_rate=1.0)

    def test_zero_epochs_keeps_weights(self):
        rng = np.random.default_rng(6)
        w = rng.standard_normal((3, 16))
        clf = LocalWindowClassifier(radius=5, channels=3, weights=w)
        out, history = train(clf, [toy_crop(rng)], epochs=0, learning_rate=1.0)
        assert np.array_equal(out.weights, w)
        assert history == []

    def test_same_seed_identical_weights(self):
        rng = np.random.default_rng(7)
        crops = [toy_crop(rng)]
        clf = LocalWindowClassifier(radius=3, channels=3)
        a, _ = train(clf, crops, epochs=20, learning_rate=2.0, seed=11)
        b, _ = train(clf, crops, epochs=20, learning_rate=2.0, seed=11)
        assert np.array_equal(a.weights, b.weights)
        c, _ = train(clf, crops, epochs=20, learning_rate=2.0, seed=12)
        assert not np.array_equal(a.weights, c.weights)

    def test_separable_toy_converges(self):
        rng = np.random.default_rng(8)
        crops = [toy_crop(rng) for _ in range(4)]
        clf = LocalWindowClassifier(radius=3, channels=3)
        _, history = train(clf, crops, epochs=500, learning_rate=10.0, subsample_rate=0.5, seed=0)
        assert history[-1] < 0.1

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        n, nf = 10, 7
        phi = np.concatenate([rng.random((n, nf)), np.ones((n, 1))], axis=1)
        onehot = np.zeros((n, 3))
        onehot[np.arange(n), rng.integers(0, 3, n)] = 1.0
        w = rng.standard_normal((3, nf + 1))
        eps = 1e-7
        _, grad = _loss_and_grad(w, phi, onehot, eps)
        h = 1e-6
        for i in range(3):
            for j in range(nf + 1):
                hi, lo = w.copy(), w.copy()
                hi[i, j] += h
                lo[i, j] -= h
                fd = (_loss_and_grad(hi, phi, onehot, eps)[0] - _loss_and_grad(lo, phi, onehot, eps)[0]) / (2 * h)
                assert abs(grad[i, j] - fd) <= 1e-5 * max(1.0, abs(fd))


class TestSegmentAndSerialization:
    def test_segment_dims_match_input(self):
        rng = np.random.default_rng(10)
        clf = LocalWindowClassifier(radius=2, channels=3, weights=rng.standard_normal((3, 16)))
        for _ in range(5):
            w, h = rng.integers(3, 50, 2)
            img = rgb(rng, int(w), int(h))
            labels = segment(clf, img, pad_multiple=16)
            assert (labels.width, labels.height) == (img.width, img.height)
            assert set(np.unique(labels.data)) <= {1, 2, 3}

    def test_constant_image_constant_label(self):
        rng = np.random.default_rng(11)
        clf = LocalWindowClassifier(radius=2, channels=3, weights=rng.standard_normal((3, 16)))
        img = IntensityRaster(np.full((3, 20, 20), 99, dtype=np.uint8))
        labels = segment(clf, img)
        assert np.unique(labels.data).size == 1

    def test_model_round_trip(self, tmp_path):
        rng = np.random.default_rng(12)
        clf = LocalWindowClassifier(
            radius=4,
            channels=3,
            weights=rng.standard_normal((3, 16)),
            trained_on_preprocessed=True,
            seed=99,
        )
        path = tmp_path / "model.json"
        save_model(clf, path)
        back = load_model(path)
        assert np.array_equal(back.weights, clf.weights)
        assert (back.radius, back.channels, back.seed) == (4, 3, 99)
        assert back.trained_on_preprocessed
        doc = json.loads(path.read_text())
        assert doc["format"] == "geoseg-model-v1"

    def test_load_rejects_other_json(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text("{}")
        with pytest.raises(ValueError, match="model"):
            load_model(path)
