"""Evaluation metrics: accuracy, per-class Jaccard, mean contour distance.

Boundary pixels are the upper/left pixel of each label transition: a
pixel belongs to the boundary set of a map when its label differs from
the pixel directly below or directly to its right. Image-border pixels
are not boundaries by themselves. The contour distance is directed: the
mean, over predicted boundary pixels, of the exact Euclidean distance to
the nearest ground-truth boundary pixel.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from .raster import DimensionError, LabelMap

__all__ = [
    "EvalReport",
    "accuracy",
    "class_jaccard",
    "boundary_map",
    "mean_contour_distance",
    "evaluate",
]


@dataclass(frozen=True)
class EvalReport:
    """One row of the quantitative results table."""

    accuracy: float
    jaccard_sc: float
    jaccard_le: float
    mean_contour_distance: float

    def __post_init__(self):
        for name in ("accuracy", "jaccard_sc", "jaccard_le"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.mean_contour_distance < 0.0:
            raise ValueError("mean_contour_distance must be >= 0")

    def as_dict(self) -> dict:
        return asdict(self)


def _check_pair(pred: LabelMap, gt: LabelMap) -> None:
    if pred.data.shape != gt.data.shape:
        raise DimensionError(f"shape mismatch: {pred.data.shape} vs {gt.data.shape}")
    for name, m in (("prediction", pred), ("ground truth", gt)):
        if (m.data == 0).any():
            raise ValueError(f"{name} contains label 0; metrics need fully labeled maps")


def accuracy(pred: LabelMap, gt: LabelMap) -> float:
    """Fraction of pixels whose labels agree."""
    _check_pair(pred, gt)
    return float(np.count_nonzero(pred.data == gt.data)) / pred.data.size


def class_jaccard(pred: LabelMap, gt: LabelMap, label: int) -> float:
    """Intersection over union of one label's regions; 1.0 when both empty."""
    _check_pair(pred, gt)
    p = pred.data == label
    g = gt.data == label
    union = np.count_nonzero(p | g)
    if union == 0:
        return 1.0
    return float(np.count_nonzero(p & g)) / union


def boundary_map(m: LabelMap) -> np.ndarray:
    """Boolean mask of boundary pixels (upper/left pixel of each transition)."""
    b = np.zeros(m.data.shape, dtype=bool)
    b[:-1, :] |= m.data[:-1, :] != m.data[1:, :]
    b[:, :-1] |= m.data[:, :-1] != m.data[:, 1:]
    return b


def mean_contour_distance(pred: LabelMap, gt: LabelMap, symmetric: bool = False) -> float:
    """Mean Euclidean distance from predicted boundary to GT boundary.

    Computed with an exact Euclidean distance transform; returns 0 when
    either boundary set is empty. ``symmetric=True`` averages the two
    directed values (not used in reports).
    """
    _check_pair(pred, gt)
    if symmetric:
        return 0.5 * (mean_contour_distance(pred, gt) + mean_contour_distance(gt, pred))
    bp = boundary_map(pred)
    bg = boundary_map(gt)
    if not bp.any() or not bg.any():
        return 0.0
    dist_to_gt = distance_transform_edt(~bg)
    return float(np.mean(dist_to_gt[bp]))


def evaluate(pred: LabelMap, gt: LabelMap) -> EvalReport:
    """Full report for one image pair."""
    return EvalReport(
        accuracy=accuracy(pred, gt),
        jaccard_sc=class_jaccard(pred, gt, 2),
        jaccard_le=class_jaccard(pred, gt, 3),
        mean_contour_distance=mean_contour_distance(pred, gt),
    )
