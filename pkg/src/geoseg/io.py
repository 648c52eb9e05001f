"""File formats: PNG for rasters and label maps, P3F for probability maps.

PNG conventions
    * IntensityRaster: 8-bit grayscale ("L") for 1 channel, 8-bit RGB for 3.
    * LabelMap: 8-bit grayscale holding the raw label values {0..3}.

P3F format (probability maps)
    magic bytes ``P3F1``, then width, height, channels=3 as unsigned 32-bit
    little-endian, then the sample data as 32-bit IEEE-754 little-endian
    floats, channel-major and row-major within each channel.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .raster import IntensityRaster, LabelMap, ProbabilityMap

__all__ = [
    "read_image_png",
    "write_image_png",
    "read_labels_png",
    "write_labels_png",
    "read_p3f",
    "write_p3f",
]

_P3F_MAGIC = b"P3F1"


def write_image_png(raster: IntensityRaster, path: str | Path) -> None:
    if raster.channels == 1:
        img = Image.fromarray(raster.data[0], mode="L")
    else:
        img = Image.fromarray(np.moveaxis(raster.data, 0, 2), mode="RGB")
    img.save(str(path), format="PNG")


def read_image_png(path: str | Path) -> IntensityRaster:
    with Image.open(str(path)) as img:
        if img.mode == "L":
            return IntensityRaster(np.asarray(img, dtype=np.uint8)[np.newaxis, :, :])
        if img.mode == "RGB":
            return IntensityRaster(np.moveaxis(np.asarray(img, dtype=np.uint8), 2, 0))
        raise ValueError(f"{path}: unsupported PNG mode {img.mode!r} (need L or RGB)")


def write_labels_png(labels: LabelMap, path: str | Path) -> None:
    Image.fromarray(labels.data, mode="L").save(str(path), format="PNG")


def read_labels_png(path: str | Path) -> LabelMap:
    with Image.open(str(path)) as img:
        if img.mode != "L":
            raise ValueError(f"{path}: label PNG must be 8-bit grayscale, got {img.mode!r}")
        arr = np.asarray(img, dtype=np.uint8)
    if arr.max() > 3:
        raise ValueError(f"{path}: grayscale values exceed label range {{0..3}}")
    return LabelMap(arr)


def write_p3f(pm: ProbabilityMap, path: str | Path) -> None:
    header = _P3F_MAGIC + struct.pack("<III", pm.width, pm.height, 3)
    payload = pm.data.astype("<f4").tobytes(order="C")
    Path(path).write_bytes(header + payload)


def read_p3f(path: str | Path) -> ProbabilityMap:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != _P3F_MAGIC:
        raise ValueError(f"{path}: not a P3F file (bad magic)")
    width, height, channels = struct.unpack("<III", raw[4:16])
    if channels != 3:
        raise ValueError(f"{path}: P3F channel count must be 3, got {channels}")
    expected = 16 + 4 * 3 * width * height
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated P3F payload ({len(raw)} bytes, expected {expected})")
    data = np.frombuffer(raw, dtype="<f4", offset=16).reshape(3, height, width)
    return ProbabilityMap(data.astype(np.float64))
