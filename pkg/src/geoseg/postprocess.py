"""Topological clean-up of predicted label maps.

Two steps:

1. For labels 2 and 3, keep only the largest 4-connected component; for
   label 1, keep the components that touch the top or the bottom row.
   Everything else becomes the transient label 0.
2. Every 0 pixel receives the label of the nearest (exact Euclidean)
   labeled pixel, ties broken by the smallest label.

The two steps repeat until the map is a fixed point, because the exact
Euclidean fill can in rare configurations leave a filled pixel
disconnected from its label's component. The output contains no label 0
and at most one component each of labels 2 and 3. "Touch the top and the
bottom" is read as touch-top OR touch-bottom: the image's top background
and bottom scaffold are distinct components, each reaching only one
border row, and both must survive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.ndimage import distance_transform_edt

from .raster import LabelMap

__all__ = ["Component", "DegenerateMapError", "connected_components", "enforce_topology"]


class DegenerateMapError(ValueError):
    """Step 1 removed every pixel; there is nothing to fill from."""


@dataclass(frozen=True)
class Component:
    """One 4-connected component of a single label."""

    label: int
    size: int
    touches_top: bool
    touches_bottom: bool
    pixels: np.ndarray  # flat row-major indices

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("components cannot be empty")


@njit(cache=True)
def _flood_label(mask):
    h, w = mask.shape
    comp = np.full((h, w), -1, np.int32)
    stack = np.empty(h * w, np.int64)
    nid = 0
    for r0 in range(h):
        for c0 in range(w):
            if mask[r0, c0] and comp[r0, c0] < 0:
                comp[r0, c0] = nid
                stack[0] = r0 * w + c0
                top = 1
                while top > 0:
                    top -= 1
                    p = stack[top]
                    r = p // w
                    c = p - r * w
                    if r > 0 and mask[r - 1, c] and comp[r - 1, c] < 0:
                        comp[r - 1, c] = nid
                        stack[top] = p - w
                        top += 1
                    if r + 1 < h and mask[r + 1, c] and comp[r + 1, c] < 0:
                        comp[r + 1, c] = nid
                        stack[top] = p + w
                        top += 1
                    if c > 0 and mask[r, c - 1] and comp[r, c - 1] < 0:
                        comp[r, c - 1] = nid
                        stack[top] = p - 1
                        top += 1
                    if c + 1 < w and mask[r, c + 1] and comp[r, c + 1] < 0:
                        comp[r, c + 1] = nid
                        stack[top] = p + 1
                        top += 1
                nid += 1
    return comp, nid


def connected_components(m: LabelMap, label: int) -> list[Component]:
    """4-connected components of one label.

    Ordered by size descending; ties resolve to the component whose first
    pixel comes earlier in row-major order.
    """
    mask = m.data == label
    comp, nid = _flood_label(mask)
    if nid == 0:
        return []
    flat = comp.ravel()
    sizes = np.bincount(flat[flat >= 0], minlength=nid)
    top_ids = set(np.unique(comp[0, :][comp[0, :] >= 0]).tolist())
    bottom_ids = set(np.unique(comp[-1, :][comp[-1, :] >= 0]).tolist())
    # flood ids are assigned in row-major discovery order, so the id is a
    # valid tie-break for "first pixel in row-major order"
    order = sorted(range(nid), key=lambda i: (-int(sizes[i]), i))
    return [
        Component(
            label=label,
            size=int(sizes[i]),
            touches_top=i in top_ids,
            touches_bottom=i in bottom_ids,
            pixels=np.flatnonzero(flat == i),
        )
        for i in order
    ]


def _filter_and_fill(m: LabelMap) -> np.ndarray:
    """One round of component filtering plus nearest-label fill."""
    out = m.data.copy()
    flat = out.ravel()
    for label in (2, 3):
        for comp in connected_components(m, label)[1:]:
            flat[comp.pixels] = 0
    for comp in connected_components(m, 1):
        if not (comp.touches_top or comp.touches_bottom):
            flat[comp.pixels] = 0
    if not out.any():
        raise DegenerateMapError("no pixel survived component filtering")
    holes = out == 0
    if holes.any():
        dists = np.empty((3,) + out.shape, dtype=np.float64)
        for k, label in enumerate((1, 2, 3)):
            src = out == label
            if src.any():
                dists[k] = distance_transform_edt(~src)
            else:
                dists[k] = np.inf
        nearest = np.argmin(dists, axis=0).astype(np.uint8) + 1  # ties -> smallest label
        out[holes] = nearest[holes]
    return out


def enforce_topology(m: LabelMap) -> LabelMap:
    """Filter components and fill until the map is a fixed point.

    The Euclidean fill can occasionally place a pixel that ends up
    4-disconnected from its label's surviving component (a digital
    Voronoi artifact), so the filter/fill round is repeated until nothing
    changes. Conforming maps pass through unchanged; the result has no
    label 0, at most one component each of labels 2 and 3, and is a fixed
    point of the operation. Rejects inputs containing label 0.
    """
    if (m.data == 0).any():
        raise ValueError("enforce_topology input must use labels {1, 2, 3} only")
    cur = m
    for _ in range(cur.data.size):
        nxt = _filter_and_fill(cur)
        if np.array_equal(nxt, cur.data):
            return cur
        cur = LabelMap(nxt)
    raise RuntimeError("component filtering did not reach a fixed point")
