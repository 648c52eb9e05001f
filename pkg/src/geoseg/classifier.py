"""A pixel classifier with an explicitly bounded receptive field.

A linear softmax over window statistics stands in for a convolutional
network: it keeps the one property the topology experiment needs -- a
hard receptive-field bound -- while staying tiny, dependency-free, and
bit-deterministic. Per channel, the features of a pixel are the center
value and the mean, standard deviation, minimum, and maximum of the
(2 * radius + 1)^2 window around it (clipped at the frame borders), all
normalized to [0, 1]; feature order is channel-major.

Window sums are taken over integer summed-area tables, so a pixel's
features are an exact function of its window content: changing any pixel
farther than ``radius`` (Chebyshev) away can never change the output.

Training is full-batch gradient descent on the mean soft-Jaccard loss of
the three softmax channels against one-hot ground truth, on a seeded
pixel subsample of the training crops.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.ndimage import maximum_filter, minimum_filter

from .loss import jaccard_loss, jaccard_loss_grad
from .raster import DimensionError, IntensityRaster, LabelMap, ProbabilityMap, argmax_labels
from .tiling import Crop, pad_to_multiple, unpad

__all__ = [
    "FEATURES_PER_CHANNEL",
    "LocalWindowClassifier",
    "extract_features",
    "predict",
    "train",
    "segment",
    "save_model",
    "load_model",
]

FEATURES_PER_CHANNEL = 5
_RECIPE = "winstats-v1"


@dataclass(frozen=True, eq=False)
class LocalWindowClassifier:
    radius: int = 5
    channels: int = 3
    weights: np.ndarray | None = None  # (3, feature_count + 1), bias last
    feature_recipe: str = _RECIPE
    trained_on_preprocessed: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        if self.feature_recipe != _RECIPE:
            raise ValueError(f"unknown feature recipe {self.feature_recipe!r}")
        w = self.weights
        if w is None:
            w = np.zeros((3, self.feature_count + 1), dtype=np.float64)
        else:
            w = np.asarray(w, dtype=np.float64)
            if w.shape != (3, self.feature_count + 1):
                raise ValueError(
                    f"weights must have shape (3, {self.feature_count + 1}), got {w.shape}"
                )
            if not np.isfinite(w).all():
                raise ValueError("weights must be finite")
            w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def feature_count(self) -> int:
        return FEATURES_PER_CHANNEL * self.channels

    @property
    def is_trained(self) -> bool:
        return bool(self.weights.any())


def _window_stats(s: np.ndarray, s2: np.ndarray, n: np.ndarray):
    """Mean and standard deviation from exact integer window sums."""
    mean = s / n
    var = (s2 - s * s / n) / n
    var = np.maximum(var, 0.0)
    return mean, np.sqrt(var)


def _window_sums(vals: np.ndarray, lo_y, hi_y, lo_x, hi_x) -> np.ndarray:
    """Clipped-window sums of an int64 plane via a summed-area table."""
    h, w = vals.shape
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    sat[1:, 1:] = vals.cumsum(axis=0).cumsum(axis=1)
    return (
        sat[hi_y[:, np.newaxis], hi_x[np.newaxis, :]]
        - sat[lo_y[:, np.newaxis], hi_x[np.newaxis, :]]
        - sat[hi_y[:, np.newaxis], lo_x[np.newaxis, :]]
        + sat[lo_y[:, np.newaxis], lo_x[np.newaxis, :]]
    )


def _feature_planes(img: IntensityRaster, radius: int) -> np.ndarray:
    """(feature_count, height, width) stack of per-pixel features."""
    h, w = img.height, img.width
    size = 2 * radius + 1
    lo_y = np.maximum(np.arange(h) - radius, 0)
    hi_y = np.minimum(np.arange(h) + radius, h - 1) + 1
    lo_x = np.maximum(np.arange(w) - radius, 0)
    hi_x = np.minimum(np.arange(w) + radius, w - 1) + 1
    n = (hi_y - lo_y)[:, np.newaxis] * (hi_x - lo_x)[np.newaxis, :]

    planes = np.empty((FEATURES_PER_CHANNEL * img.channels, h, w), dtype=np.float64)
    for c in range(img.channels):
        plane = img.data[c]
        plane64 = plane.astype(np.int64)
        s_sum = _window_sums(plane64, lo_y, hi_y, lo_x, hi_x)
        s_sq = _window_sums(plane64 * plane64, lo_y, hi_y, lo_x, hi_x)
        mean, std = _window_stats(s_sum, s_sq, n)
        base = FEATURES_PER_CHANNEL * c
        planes[base + 0] = plane / 255.0
        planes[base + 1] = mean / 255.0
        planes[base + 2] = std / 255.0
        planes[base + 3] = minimum_filter(plane, size=size, mode="nearest") / 255.0
        planes[base + 4] = maximum_filter(plane, size=size, mode="nearest") / 255.0
    return planes


def extract_features(img: IntensityRaster, x: int, y: int, radius: int) -> np.ndarray:
    """Feature vector of one pixel; the window is clipped at the borders."""
    if not (0 <= x < img.width and 0 <= y < img.height):
        raise DimensionError(f"pixel ({x}, {y}) outside frame {img.width}x{img.height}")
    y0, y1 = max(y - radius, 0), min(y + radius, img.height - 1) + 1
    x0, x1 = max(x - radius, 0), min(x + radius, img.width - 1) + 1
    window = img.data[:, y0:y1, x0:x1].astype(np.int64)
    s = window.sum(axis=(1, 2))
    s2 = (window * window).sum(axis=(1, 2))
    n = np.full(img.channels, (y1 - y0) * (x1 - x0), dtype=np.int64)
    mean, std = _window_stats(s, s2, n)
    feats = np.empty(FEATURES_PER_CHANNEL * img.channels, dtype=np.float64)
    for c in range(img.channels):
        base = FEATURES_PER_CHANNEL * c
        feats[base + 0] = img.data[c, y, x] / 255.0
        feats[base + 1] = mean[c] / 255.0
        feats[base + 2] = std[c] / 255.0
        feats[base + 3] = window[c].min() / 255.0
        feats[base + 4] = window[c].max() / 255.0
    return feats


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def predict(clf: LocalWindowClassifier, img: IntensityRaster) -> ProbabilityMap:
    """Per-pixel softmax over the three linear class scores."""
    if img.channels != clf.channels:
        raise DimensionError(
            f"classifier expects {clf.channels}-channel input, got {img.channels}"
        )
    if not clf.is_trained:
        warnings.warn("classifier weights are all zero; predictions are uniform", stacklevel=2)
    planes = _feature_planes(img, clf.radius)
    z = np.tensordot(clf.weights[:, :-1], planes, axes=([1], [0]))
    z += clf.weights[:, -1][:, np.newaxis, np.newaxis]
    z -= z.max(axis=0, keepdims=True)
    e = np.exp(z)
    return ProbabilityMap(e / e.sum(axis=0, keepdims=True))


def _loss_and_grad(w: np.ndarray, phi: np.ndarray, onehot: np.ndarray, eps: float):
    """Mean per-channel soft-Jaccard loss of softmax(phi @ w.T) and dL/dw."""
    p = _softmax_rows(phi @ w.T)
    loss = 0.0
    grad = np.empty_like(p)
    for c in range(3):
        loss += jaccard_loss(p[:, c], onehot[:, c], eps)
        grad[:, c] = jaccard_loss_grad(p[:, c], onehot[:, c], eps)
    loss /= 3.0
    grad /= 3.0
    dz = p * (grad - (grad * p).sum(axis=1, keepdims=True))
    return loss, dz.T @ phi


def _gather_training_set(crops: list[Crop], radius: int, rate: float, seed: int):
    rng = np.random.Generator(np.random.PCG64(seed))
    phis = []
    labels = []
    for c in crops:
        planes = _feature_planes(c.image, radius)
        npix = c.image.height * c.image.width
        take = max(1, int(round(rate * npix)))
        idx = rng.choice(npix, size=min(take, npix), replace=False)
        idx.sort()
        phis.append(planes.reshape(planes.shape[0], npix)[:, idx].T)
        labels.append(c.labels.data.reshape(npix)[idx])
    phi = np.concatenate(phis, axis=0)
    phi = np.concatenate([phi, np.ones((phi.shape[0], 1))], axis=1)
    y = np.concatenate(labels)
    if (y == 0).any():
        raise ValueError("training crops contain unlabeled (0) pixels")
    onehot = np.zeros((y.size, 3), dtype=np.float64)
    onehot[np.arange(y.size), y - 1] = 1.0
    return phi, onehot


def train(
    clf: LocalWindowClassifier,
    crops: list[Crop],
    epochs: int,
    learning_rate: float,
    subsample_rate: float = 0.05,
    seed: int = 0,
    eps: float = 1e-7,
) -> tuple[LocalWindowClassifier, list[float]]:
    """Full-batch gradient descent on the mean per-channel soft-Jaccard loss.

    Features are standardized over the training sample for conditioning;
    the standardization is folded back into the returned weights, so the
    trained model remains a plain linear softmax over the raw features.
    Deterministic given (crops, hyper-parameters, seed); the seed drives
    only the pixel subsampling. Returns the trained classifier and the
    per-epoch loss history (recorded after each step).
    """
    if not crops:
        raise ValueError("training needs at least one crop")
    if epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {epochs}")
    if learning_rate <= 0:
        raise ValueError(f"learning rate must be positive, got {learning_rate}")
    if not 0 < subsample_rate <= 1:
        raise ValueError(f"subsample rate must lie in (0, 1], got {subsample_rate}")
    if epochs == 0:
        return replace(clf, seed=seed), []
    phi, onehot = _gather_training_set(crops, clf.radius, subsample_rate, seed)
    mu = phi[:, :-1].mean(axis=0)
    sd = phi[:, :-1].std(axis=0)
    sd[sd == 0.0] = 1.0
    phi[:, :-1] = (phi[:, :-1] - mu) / sd
    # fold the incoming weights into standardized space so epochs=0 is a no-op
    w = clf.weights.copy()
    w[:, -1] += w[:, :-1] @ mu
    w[:, :-1] *= sd
    history = []
    for _ in range(epochs):
        loss, dw = _loss_and_grad(w, phi, onehot, eps)
        w -= learning_rate * dw
        history.append(loss)
    w[:, :-1] /= sd
    w[:, -1] -= w[:, :-1] @ mu
    return replace(clf, weights=w, seed=seed), history


def segment(clf: LocalWindowClassifier, img: IntensityRaster, pad_multiple: int = 16) -> LabelMap:
    """Pad to a multiple, predict, take the argmax labels, unpad."""
    padded, dims = pad_to_multiple(img, pad_multiple)
    return unpad(argmax_labels(predict(clf, padded)), dims)


def save_model(clf: LocalWindowClassifier, path: str | Path) -> None:
    doc = {
        "format": "geoseg-model-v1",
        "radius": clf.radius,
        "channels": clf.channels,
        "feature_recipe": clf.feature_recipe,
        "trained_on_preprocessed": clf.trained_on_preprocessed,
        "seed": clf.seed,
        "weights": clf.weights.tolist(),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path: str | Path) -> LocalWindowClassifier:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "geoseg-model-v1":
        raise ValueError(f"{path}: not a geoseg model file")
    return LocalWindowClassifier(
        radius=doc["radius"],
        channels=doc["channels"],
        weights=np.asarray(doc["weights"], dtype=np.float64),
        feature_recipe=doc["feature_recipe"],
        trained_on_preprocessed=doc["trained_on_preprocessed"],
        seed=doc["seed"],
    )
