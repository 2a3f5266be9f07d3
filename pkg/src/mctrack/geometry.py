"""Boxes, binary masks, and the geometric primitives the tracker consumes.

Boxes are center-based (cx, cy, w, h) in continuous pixel coordinates
because the filter state is center-based; corner-based "left,top,w,h"
forms exist only at I/O boundaries. Masks are discrete grids; pixel
(col, row) has its center at (col, row) and spans half a pixel on each
side, so a single pixel at (2, 3) has tight box cx=2, cy=3, w=h=1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class EmptyMaskError(ValueError):
    """Raised when a mask with zero set pixels is asked for stats."""


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: center (cx, cy), positive width/height, in pixels."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "w", "h"):  # normalize numpy scalars
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box dimensions must be positive, got w={self.w}, h={self.h}")

    @property
    def left(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def top(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def right(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def bottom(self) -> float:
        return self.cy + self.h / 2.0

    def area(self) -> float:
        return self.w * self.h

    def to_ltwh(self) -> tuple[float, float, float, float]:
        return (self.left, self.top, self.w, self.h)

    @classmethod
    def from_ltwh(cls, left: float, top: float, w: float, h: float) -> "BoundingBox":
        return cls(left + w / 2.0, top + h / 2.0, w, h)


@dataclass(frozen=True)
class MaskGrid:
    """Binary mask as row-major run lengths; the first run counts zeros."""

    width: int
    height: int
    runs: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.width < 0 or self.height < 0:
            raise ValueError("grid dimensions must be non-negative")
        if any(r < 0 for r in self.runs):
            raise ValueError("run lengths must be non-negative")
        if sum(self.runs) != self.width * self.height:
            raise ValueError(
                f"runs sum to {sum(self.runs)}, expected {self.width * self.height}"
            )

    def decode(self) -> np.ndarray:
        """Decode to a (height, width) boolean array."""
        flat = np.zeros(self.width * self.height, dtype=bool)
        pos = 0
        value = False
        for run in self.runs:
            if value:
                flat[pos : pos + run] = True
            pos += run
            value = not value
        return flat.reshape(self.height, self.width)

    @classmethod
    def from_array(cls, grid: np.ndarray) -> "MaskGrid":
        arr = np.asarray(grid, dtype=bool)
        if arr.ndim != 2:
            raise ValueError("mask array must be 2-dimensional")
        height, width = arr.shape
        flat = arr.reshape(-1)
        runs: list[int] = []
        value = False
        count = 0
        for bit in flat:
            if bit == value:
                count += 1
            else:
                runs.append(count)
                value = bit
                count = 1
        runs.append(count)
        if width * height == 0:
            runs = [0]
        return cls(width, height, tuple(runs))

    def to_text(self) -> str:
        """Fixture form: "width height r0 r1 r2 ..." space-separated."""
        return " ".join([str(self.width), str(self.height), *map(str, self.runs)])

    @classmethod
    def from_text(cls, text: str) -> "MaskGrid":
        fields = text.split()
        if len(fields) < 2:
            raise ValueError("mask text needs at least width and height")
        width, height = int(fields[0]), int(fields[1])
        runs = tuple(int(f) for f in fields[2:])
        return cls(width, height, runs)


@dataclass(frozen=True)
class MaskStats:
    """Area, centroid, and minimal covering box of a mask's set pixels."""

    area: float
    centroid: tuple[float, float]
    tight_box: BoundingBox


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes; 0 when disjoint, 1 when identical."""
    iw = min(a.right, b.right) - max(a.left, b.left)
    ih = min(a.bottom, b.bottom) - max(a.top, b.top)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area() + b.area() - inter)


def center_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between box centers, in pixels."""
    return math.hypot(a.cx - b.cx, a.cy - b.cy)


def mask_stats(mask: MaskGrid) -> MaskStats:
    """Area, centroid (mean of set-pixel centers), and tight box of a mask.

    Raises EmptyMaskError when no pixel is set, which callers treat as an
    absent candidate.
    """
    grid = mask.decode()
    rows, cols = np.nonzero(grid)
    if rows.size == 0:
        raise EmptyMaskError("mask has no set pixels")
    area = float(rows.size)
    cx = float(cols.mean())
    cy = float(rows.mean())
    min_c, max_c = float(cols.min()), float(cols.max())
    min_r, max_r = float(rows.min()), float(rows.max())
    tight = BoundingBox(
        (min_c + max_c) / 2.0,
        (min_r + max_r) / 2.0,
        max_c - min_c + 1.0,
        max_r - min_r + 1.0,
    )
    return MaskStats(area=area, centroid=(cx, cy), tight_box=tight)


def stats_from_box(box: BoundingBox) -> MaskStats:
    """Stats of an ideal filled-rectangle mask occupying the given box."""
    return MaskStats(area=box.area(), centroid=(box.cx, box.cy), tight_box=box)
