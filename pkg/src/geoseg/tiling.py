"""Crop extraction for training and pad-to-multiple for full-image inference.

Training crops are taken on a stride grid anchored at (0, 0); the last
row/column of crops is shifted inward so the frame is fully covered.
Only crops whose ground truth contains at least one pixel of label 2 or
label 3 are kept, which drops the all-background majority of the frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import DimensionError, IntensityRaster, LabelMap, crop

__all__ = ["CropSpec", "Crop", "grid_crops", "pad_to_multiple", "unpad"]


@dataclass(frozen=True)
class CropSpec:
    size: int = 512
    stride: int | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"crop size must be >= 1, got {self.size}")
        if self.stride is None:
            object.__setattr__(self, "stride", self.size)
        if not 1 <= self.stride <= self.size:
            raise ValueError(f"stride must satisfy 1 <= stride <= size, got {self.stride}")


@dataclass(frozen=True)
class Crop:
    x0: int
    y0: int
    image: IntensityRaster
    labels: LabelMap


def _grid_positions(extent: int, size: int, stride: int) -> list[int]:
    positions = list(range(0, extent - size + 1, stride))
    if positions[-1] != extent - size:
        positions.append(extent - size)
    return positions


def grid_crops(image: IntensityRaster, gt: LabelMap, spec: CropSpec = CropSpec()) -> list[Crop]:
    """Grid crops of ``image``/``gt`` keeping only crops with label 2 or 3.

    Output is ordered row-major by crop origin. Rejects images smaller
    than the crop size in either dimension.
    """
    if (image.width, image.height) != (gt.width, gt.height):
        raise DimensionError(
            f"image {image.width}x{image.height} and ground truth {gt.width}x{gt.height} differ"
        )
    if image.width < spec.size or image.height < spec.size:
        raise DimensionError(
            f"image {image.width}x{image.height} is smaller than crop size {spec.size}"
        )
    kept = []
    for y0 in _grid_positions(image.height, spec.size, spec.stride):
        for x0 in _grid_positions(image.width, spec.size, spec.stride):
            labels = crop(gt, x0, y0, spec.size, spec.size)
            if (labels.data >= 2).any():
                kept.append(Crop(x0, y0, crop(image, x0, y0, spec.size, spec.size), labels))
    return kept


def pad_to_multiple(image: IntensityRaster, m: int) -> tuple[IntensityRaster, tuple[int, int]]:
    """Pad right/bottom by edge replication to the next multiple of ``m``.

    Returns the padded raster and the original (width, height) for exact
    unpadding.
    """
    if m < 1:
        raise ValueError(f"pad multiple must be >= 1, got {m}")
    new_w = -(-image.width // m) * m
    new_h = -(-image.height // m) * m
    dims = (image.width, image.height)
    if (new_w, new_h) == dims:
        return image, dims
    padded = np.pad(
        image.data,
        ((0, 0), (0, new_h - image.height), (0, new_w - image.width)),
        mode="edge",
    )
    return IntensityRaster(padded), dims


def unpad(r: IntensityRaster | LabelMap, dims: tuple[int, int]):
    """Top-left crop back to the original (width, height)."""
    w, h = dims
    if w > r.width or h > r.height:
        raise DimensionError(f"original dims {w}x{h} exceed padded raster {r.width}x{r.height}")
    return crop(r, 0, 0, w, h)
