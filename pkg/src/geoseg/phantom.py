"""Seeded synthetic layered phantoms with exact ground truth.

Each phantom stacks horizontal bands, top to bottom: bright background,
an optional thin detached strip with a bright gap band beneath it, a
textured mid-bright band (label 2), a darker speckled band (label 3), a
fibrous mid-gray scaffold band containing bright elliptical holes, and
bright bottom background. Band boundaries carry a mild sinusoidal wobble;
the detached strip keeps a constant thickness so it always separates the
gap band from the top background.

Ground truth follows the connectivity semantics the pipeline is built to
recover: when the detached strip is unbroken it forms a sealed frontier,
so strip and gap band belong to label 2; when the strip is interrupted by
a break, the gap band becomes part of the bright region 4-connected to
the top background, and strip plus gap band are labeled 1. Scaffold,
holes, and both backgrounds are always label 1.

Two phantoms with the same seed but different ``detached_layer`` values
differ only inside the strip/gap bands: image pixels change in the break
columns of the strip, labels change in the strip and gap bands.

Randomness comes from numpy's PCG64 generator; geometry draws happen in a
fixed order before the noise field, so output is bit-identical across
runs and platforms for a given spec, and ground truth depends on the
geometry draws only, never on the pixel noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import IntensityRaster, LabelMap

__all__ = ["PhantomSpec", "PhantomPair", "generate_phantom"]

_VARIANTS = ("none", "unbroken", "broken")

# region ids used during generation
_TOPBG, _STRIP, _GAP, _SC, _EPI, _SCAF, _HOLE, _BOTBG, _SCGAP = range(9)


@dataclass(frozen=True)
class PhantomSpec:
    """Seeded parameter record controlling synthetic image/GT generation.

    Intensity means/deviations are generator calibration, not claims; the
    defaults were tuned once so that the per-band appearance is locally
    separable after geodesic preprocessing.
    """

    width: int = 192
    height: int = 192
    seed: int = 0
    detached_layer: str = "unbroken"
    break_width: int = 24
    scaffold_hole_count: int = 3
    # bright desquamation gaps inside the mid-bright band (its texture);
    # enclosed on every variant, so preprocessing always darkens them
    sc_hole_count: int = 4
    # band thickness fractions of the image height; the remainder is
    # split between top and bottom background
    strip_frac: float = 0.026
    gap_frac: float = 0.07
    sc_frac: float = 0.21
    epi_frac: float = 0.18
    scaffold_frac: float = 0.23
    wobble_amp: int = 2
    wobble_periods: int = 2
    # per-region intensity mean/deviation (8-bit scale); tissue regions
    # additionally carry fixed stain-like channel tints scaled by `tint`
    bg_mean: float = 235.0
    bg_dev: float = 4.0
    strip_mean: float = 135.0
    strip_dev: float = 6.0
    gap_mean: float = 235.0
    gap_dev: float = 4.0
    sc_mean: float = 195.0
    sc_dev: float = 7.0
    # the top of the mid-bright band carries a bright surface ramp fading
    # into the body, like a desquamating surface seen from above
    sc_surface_rows: int = 5
    sc_surface_bright: float = 226.0
    epi_mean: float = 105.0
    epi_dev: float = 11.0
    scaffold_mean: float = 150.0
    scaffold_dev: float = 9.0
    hole_mean: float = 235.0
    hole_dev: float = 4.0
    tint: float = 12.0

    def __post_init__(self):
        if self.detached_layer not in _VARIANTS:
            raise ValueError(f"detached_layer must be one of {_VARIANTS}, got {self.detached_layer!r}")
        if self.width < 16 or self.height < 16:
            raise ValueError("phantom must be at least 16x16")
        if self.break_width < 1:
            raise ValueError("break_width must be >= 1")
        if self.break_width + 4 > self.width:
            raise ValueError("break_width leaves no room in the frame")
        if self.scaffold_hole_count < 0:
            raise ValueError("scaffold_hole_count must be >= 0")
        if self.sc_hole_count < 0:
            raise ValueError("sc_hole_count must be >= 0")

    def band_heights(self) -> dict[str, int]:
        """Integer band thicknesses; backgrounds absorb the remainder."""
        detached = self.detached_layer != "none"
        strip = round(self.strip_frac * self.height) if detached else 0
        gap = round(self.gap_frac * self.height) if detached else 0
        sc = round(self.sc_frac * self.height)
        epi = round(self.epi_frac * self.height)
        scaf = round(self.scaffold_frac * self.height)
        leftover = self.height - (strip + gap + sc + epi + scaf)
        top = round(leftover * 0.45)
        bottom = leftover - top
        heights = {
            "top": top, "strip": strip, "gap": gap, "sc": sc,
            "epi": epi, "scaffold": scaf, "bottom": bottom,
        }
        amp = self.wobble_amp
        if top < amp + 2 or bottom < amp + 2:
            raise ValueError(f"bands exceed the image height: backgrounds reduced to {top}/{bottom} rows")
        for name in ("gap", "sc", "epi", "scaffold"):
            if heights[name] and heights[name] < 2 * amp + 2:
                raise ValueError(f"band {name!r} too thin ({heights[name]} rows) for wobble amplitude {amp}")
        if detached and strip < 2:
            raise ValueError(f"detached strip needs >= 2 rows, got {strip}")
        if self.sc_surface_rows < 0 or self.sc_surface_rows >= sc:
            raise ValueError(f"sc_surface_rows must lie in [0, {sc}), got {self.sc_surface_rows}")
        return heights


@dataclass(frozen=True)
class PhantomPair:
    image: IntensityRaster
    gt: LabelMap

    def __post_init__(self):
        if (self.image.width, self.image.height) != (self.gt.width, self.gt.height):
            raise ValueError("phantom image and ground truth dimensions differ")


def _wobble(base: int, amp: int, periods: int, phase: float, width: int) -> np.ndarray:
    x = np.arange(width, dtype=np.float64)
    return (base + np.rint(amp * np.sin(2.0 * math.pi * periods * x / width + phase))).astype(np.int64)


def generate_phantom(spec: PhantomSpec) -> PhantomPair:
    """Deterministically generate one image/ground-truth pair."""
    h, w = spec.height, spec.width
    bands = spec.band_heights()
    detached = spec.detached_layer != "none"
    broken = spec.detached_layer == "broken"

    rng = np.random.Generator(np.random.PCG64(spec.seed))
    # geometry draws, fixed order, drawn regardless of variant so that
    # same-seed variants share every coordinate
    phases = rng.uniform(0.0, 2.0 * math.pi, size=6)
    break_x = int(rng.integers(2, w - spec.break_width - 1))
    holes = []
    r_scaf_base = bands["top"] + bands["strip"] + bands["gap"] + bands["sc"] + bands["epi"]
    r_bot_base = r_scaf_base + bands["scaffold"]
    margin = spec.wobble_amp + 2
    for _ in range(spec.scaffold_hole_count):
        # small enough that every hole pixel keeps scaffold in its window
        rx = int(rng.integers(3, 7))
        ry = int(rng.integers(2, 4))
        lo = r_scaf_base + margin + ry
        hi = r_bot_base - margin - ry
        if lo >= hi or rx + 2 >= w - rx - 2:
            raise ValueError("scaffold band too small to host the requested holes")
        cx = int(rng.integers(rx + 2, w - rx - 2))
        cy = int(rng.integers(lo, hi))
        holes.append((cx, cy, rx, ry))
    sc_holes = []
    r_sc_base = bands["top"] + bands["strip"] + bands["gap"]
    for _ in range(spec.sc_hole_count):
        rx = int(rng.integers(5, 10))
        ry = int(rng.integers(2, 5))
        lo = r_sc_base + spec.sc_surface_rows + margin + ry
        hi = r_sc_base + bands["sc"] - margin - ry
        if bands["sc"] and (lo >= hi or rx + 2 >= w - rx - 2):
            raise ValueError("band too small to host the requested in-band gaps")
        cx = int(rng.integers(rx + 2, w - rx - 2))
        cy = int(rng.integers(lo, hi))
        sc_holes.append((cx, cy, rx, ry))
    noise = rng.standard_normal((3, h, w))

    # wobbled band boundaries (row where each band begins, per column)
    b_strip = _wobble(bands["top"], spec.wobble_amp, spec.wobble_periods, phases[0], w)
    b_gap = b_strip + bands["strip"]  # parallel: constant strip thickness
    r = bands["top"] + bands["strip"] + bands["gap"]
    b_sc = _wobble(r, spec.wobble_amp, spec.wobble_periods, phases[1], w)
    r += bands["sc"]
    b_epi = _wobble(r, spec.wobble_amp, spec.wobble_periods, phases[2], w)
    r += bands["epi"]
    b_scaf = _wobble(r, spec.wobble_amp, spec.wobble_periods, phases[3], w)
    b_bot = _wobble(r_bot_base, spec.wobble_amp, spec.wobble_periods, phases[4], w)

    rows = np.arange(h, dtype=np.int64)[:, np.newaxis]
    region = np.full((h, w), _TOPBG, dtype=np.uint8)
    if detached:
        region[(rows >= b_strip) & (rows < b_gap)] = _STRIP
        region[(rows >= b_gap) & (rows < b_sc)] = _GAP
    region[rows >= b_sc] = _SC
    region[rows >= b_epi] = _EPI
    region[rows >= b_scaf] = _SCAF
    region[rows >= b_bot] = _BOTBG
    ys = np.arange(h, dtype=np.float64)[:, np.newaxis]
    xs = np.arange(w, dtype=np.float64)[np.newaxis, :]
    for cx, cy, rx, ry in holes:
        ellipse = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0
        region[ellipse & (region == _SCAF)] = _HOLE
    for cx, cy, rx, ry in sc_holes:
        ellipse = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0
        region[ellipse & (region == _SC)] = _SCGAP
    if broken:
        cols = np.zeros(w, dtype=bool)
        cols[break_x : break_x + spec.break_width] = True
        region[(rows >= b_strip) & (rows < b_gap) & cols[np.newaxis, :]] = _GAP

    means = np.empty(9)
    devs = np.empty(9)
    means[_TOPBG] = means[_BOTBG] = spec.bg_mean
    devs[_TOPBG] = devs[_BOTBG] = spec.bg_dev
    means[_STRIP], devs[_STRIP] = spec.strip_mean, spec.strip_dev
    means[_GAP], devs[_GAP] = spec.gap_mean, spec.gap_dev
    means[_SC], devs[_SC] = spec.sc_mean, spec.sc_dev
    means[_EPI], devs[_EPI] = spec.epi_mean, spec.epi_dev
    means[_SCAF], devs[_SCAF] = spec.scaffold_mean, spec.scaffold_dev
    means[_HOLE], devs[_HOLE] = spec.hole_mean, spec.hole_dev
    means[_SCGAP], devs[_SCGAP] = spec.hole_mean, spec.hole_dev
    # stain-like unit tints per region and channel; bright regions stay
    # neutral so connectivity, not color, distinguishes them
    tints = np.zeros((9, 3))
    tints[_STRIP] = (1.0, 0.0, -1.0)
    tints[_SC] = (1.0, 0.0, -1.0)
    tints[_EPI] = (0.0, -1.0, 0.9)
    tints[_SCAF] = (-1.0, 0.4, 0.6)

    # horizontal fiber streaks texture the scaffold band
    fiber = 6.0 * np.sin(2.0 * math.pi * np.arange(h) / 7.0 + phases[5])
    fiber_map = np.where(region == _SCAF, fiber[:, np.newaxis], 0.0)
    if spec.sc_surface_rows > 0 and bands["sc"]:
        depth = rows - b_sc[np.newaxis, :]
        in_ramp = (region == _SC) & (depth < spec.sc_surface_rows)
        ramp_w = np.where(in_ramp, (spec.sc_surface_rows - depth) / spec.sc_surface_rows, 0.0)
    else:
        ramp_w = np.zeros((h, w))

    dev_map = devs[region]
    img = np.empty((3, h, w), dtype=np.uint8)
    for c in range(3):
        base = means[region] + spec.tint * tints[region, c] + fiber_map
        # the surface ramp blends each channel toward neutral bright
        chan_mean = base + ramp_w * (spec.sc_surface_bright - base)
        img[c] = np.clip(np.rint(chan_mean + dev_map * noise[c]), 0, 255).astype(np.uint8)

    label_of_region = np.array([1, 2, 2, 2, 3, 1, 1, 1, 2], dtype=np.uint8)
    if broken:
        label_of_region[_STRIP] = 1
        label_of_region[_GAP] = 1
    gt = label_of_region[region]

    return PhantomPair(image=IntensityRaster(img), gt=LabelMap(gt))
