"""Soft Jaccard loss and its analytic gradient.

For vectors X, Y with entries in [0, 1] the loss is

    1 - (XY + eps) / (X^2 + Y^2 - XY + eps)

with XY = sum(x_i * y_i) and X^2 = sum(x_i^2). Since
X^2 + Y^2 - 2*XY = sum((x_i - y_i)^2) >= 0, the denominator dominates the
numerator and the loss lies in [0, 1), hitting 0 exactly when X = Y.

The gradient with respect to x_i follows from the quotient rule:

    dJ/dx_i = ((S + eps) * (2*x_i - y_i) - y_i * (Q + eps)) / (Q + eps)^2

with S = XY and Q = X^2 + Y^2 - XY. All arithmetic is double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import DimensionError, LabelMap, ProbabilityMap

__all__ = ["LossConfig", "jaccard_loss", "jaccard_loss_grad", "multichannel_loss"]


@dataclass(frozen=True)
class LossConfig:
    epsilon: float = 1e-7

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def _validate_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    for name, v in (("X", x), ("Y", y)):
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ValueError(f"{name} entries must lie in [0, 1]")
    return x, y


def jaccard_loss(x, y, eps: float = 1e-7) -> float:
    x, y = _validate_pair(x, y)
    s = float(np.dot(x, y))
    q = float(np.dot(x, x)) + float(np.dot(y, y)) - s
    return 1.0 - (s + eps) / (q + eps)


def jaccard_loss_grad(x, y, eps: float = 1e-7) -> np.ndarray:
    """dJ/dx_i for every component; matches central finite differences."""
    x, y = _validate_pair(x, y)
    s = float(np.dot(x, y))
    q = float(np.dot(x, x)) + float(np.dot(y, y)) - s
    d = q + eps
    return ((s + eps) * (2.0 * x - y) - y * d) / (d * d)


def multichannel_loss(p: ProbabilityMap, g: LabelMap, eps: float = 1e-7) -> float:
    """Mean over the 3 channels of the loss against the one-hot ground truth.

    Channel k is compared against the indicator of label k + 1.
    """
    if (p.width, p.height) != (g.width, g.height):
        raise DimensionError(
            f"probability map {p.width}x{p.height} and labels {g.width}x{g.height} differ"
        )
    losses = [
        jaccard_loss(p.data[k].ravel(), (g.data == k + 1).astype(np.float64).ravel(), eps)
        for k in range(3)
    ]
    return float(np.mean(losses))
