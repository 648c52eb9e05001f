"""Core image containers and pixel-level utilities.

Three container types are shared by every other module:

* :class:`IntensityRaster` -- 8-bit intensities, 1 or 3 channels, planar
  layout (each channel row-major, channels stored consecutively).
* :class:`LabelMap` -- per-pixel labels in {0, 1, 2, 3}; 0 marks a pixel
  that is transiently unlabeled during post-processing.
* :class:`ProbabilityMap` -- 3 channels of unit-interval doubles; channel
  ``k`` carries the probability of label ``k + 1``.

All containers are immutable after construction (the backing arrays are
marked read-only), so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionError",
    "IntensityRaster",
    "LabelMap",
    "ProbabilityMap",
    "pointwise_min",
    "argmax_labels",
    "crop",
]


class DimensionError(ValueError):
    """Raised when raster shapes or channel counts do not line up."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class IntensityRaster:
    """8-bit image, planar ``(channels, height, width)`` layout."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        if arr.ndim != 3:
            raise DimensionError(f"expected 2-D or 3-D array, got shape {arr.shape}")
        if arr.shape[0] not in (1, 3):
            raise DimensionError(f"channel count must be 1 or 3, got {arr.shape[0]}")
        if arr.shape[1] < 1 or arr.shape[2] < 1:
            raise DimensionError(f"empty raster shape {arr.shape}")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError(f"intensities must be integers, got dtype {arr.dtype}")
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        else:
            arr = arr.copy()
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def channel(self, k: int) -> np.ndarray:
        """Read-only 2-D view of channel ``k``."""
        return self.data[k]

    @classmethod
    def full(cls, width: int, height: int, value: int, channels: int = 1) -> "IntensityRaster":
        return cls(np.full((channels, height, width), value, dtype=np.uint8))


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Per-pixel labels in {0, 1, 2, 3}, row-major ``(height, width)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise DimensionError(f"expected 2-D array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"empty label map shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"labels must be integers, got dtype {arr.dtype}")
        if arr.min() < 0 or arr.max() > 3:
            raise ValueError("labels must lie in {0, 1, 2, 3}")
        object.__setattr__(self, "data", _freeze(arr.astype(np.uint8)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class ProbabilityMap:
    """3 channels of unit-interval doubles; channel k <-> label k + 1."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] != 3:
            raise DimensionError(f"expected (3, height, width) array, got shape {arr.shape}")
        if arr.shape[1] < 1 or arr.shape[2] < 1:
            raise DimensionError(f"empty probability map shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("probabilities must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "data", _freeze(arr.copy()))

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


def pointwise_min(a: IntensityRaster, b: IntensityRaster) -> IntensityRaster:
    """Pixelwise/channelwise minimum of two same-shaped rasters."""
    if a.data.shape != b.data.shape:
        raise DimensionError(
            f"shape mismatch: {a.data.shape} vs {b.data.shape}"
        )
    return IntensityRaster(np.minimum(a.data, b.data))


def argmax_labels(p: ProbabilityMap) -> LabelMap:
    """Label each pixel with its most probable class.

    The output label is the maximal channel index plus one; ties resolve
    toward the smallest channel index, so label 0 is never produced.
    """
    return LabelMap(np.argmax(p.data, axis=0).astype(np.uint8) + 1)


def crop(r: IntensityRaster | LabelMap, x0: int, y0: int, w: int, h: int):
    """Copy the ``w`` x ``h`` rectangle at ``(x0, y0)``; same container kind out."""
    if w < 1 or h < 1:
        raise DimensionError(f"crop size must be positive, got {w}x{h}")
    if x0 < 0 or y0 < 0 or x0 + w > r.width or y0 + h > r.height:
        raise DimensionError(
            f"crop rectangle ({x0},{y0},{w},{h}) exceeds raster {r.width}x{r.height}"
        )
    if isinstance(r, IntensityRaster):
        return IntensityRaster(r.data[:, y0 : y0 + h, x0 : x0 + w])
    if isinstance(r, LabelMap):
        return LabelMap(r.data[y0 : y0 + h, x0 : x0 + w])
    raise TypeError(f"cannot crop {type(r).__name__}")
