"""Axis-aligned rectangle arithmetic and the target shape region.

Shapes are canonically binary raster masks (a cell grid in layout units);
polygons are rasterized on load. The inside test for a point is membership of
the cell containing it, and nearest-inside queries walk the precomputed
distance transform (in-grid) or the boundary cell list (outside the grid).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from PIL import Image, ImageDraw
from scipy import ndimage

MIN_MASK_RESOLUTION = 256
DEFAULT_RASTER_RESOLUTION = 512


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle given by center and positive extents."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"rect extents must be positive, got {self.w} x {self.h}")

    @property
    def left(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def right(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def top(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def bottom(self) -> float:
        return self.cy + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def diagonal(self) -> float:
        return math.hypot(self.w, self.h)


def overlap_area(a: Rect, b: Rect) -> float:
    """Intersection area of two axis-aligned rectangles (0 when disjoint)."""
    ox = min(a.right, b.right) - max(a.left, b.left)
    oy = min(a.bottom, b.bottom) - max(a.top, b.top)
    if ox <= 0.0 or oy <= 0.0:
        return 0.0
    return ox * oy


def overlap_ratio(target: Rect, others: Iterable[Rect]) -> float:
    """Sum of overlap areas with ``others`` divided by the target's area."""
    total = sum(overlap_area(target, other) for other in others)
    return total / target.area


def overlap_areas_vs(
    cx: float, cy: float, w: float, h: float,
    xs: np.ndarray, ys: np.ndarray, ws: np.ndarray, hs: np.ndarray,
) -> np.ndarray:
    """Vectorized overlap areas of one rectangle against arrays of rectangles."""
    ox = np.minimum(cx + w / 2.0, xs + ws / 2.0) - np.maximum(cx - w / 2.0, xs - ws / 2.0)
    oy = np.minimum(cy + h / 2.0, ys + hs / 2.0) - np.maximum(cy - h / 2.0, ys - hs / 2.0)
    return np.clip(ox, 0.0, None) * np.clip(oy, 0.0, None)


def pairwise_overlap_matrix(
    xs: np.ndarray, ys: np.ndarray, ws: np.ndarray, hs: np.ndarray
) -> np.ndarray:
    """Full N x N matrix of pairwise overlap areas (diagonal zeroed)."""
    left = xs - ws / 2.0
    right = xs + ws / 2.0
    top = ys - hs / 2.0
    bottom = ys + hs / 2.0
    ox = np.minimum(right[:, None], right[None, :]) - np.maximum(left[:, None], left[None, :])
    oy = np.minimum(bottom[:, None], bottom[None, :]) - np.maximum(top[:, None], top[None, :])
    out = np.clip(ox, 0.0, None) * np.clip(oy, 0.0, None)
    np.fill_diagonal(out, 0.0)
    return out


class ShapeRegion:
    """Target layout shape backed by a binary cell mask.

    Layout coordinates map to the grid via ``origin`` (position of the mask's
    top-left corner) and ``cell`` (layout units per cell, square cells, y
    increasing downward). All queries are pure; the instance is immutable
    after construction.
    """

    def __init__(
        self,
        mask: np.ndarray,
        origin: tuple[float, float] = (0.0, 0.0),
        cell: float = 1.0,
        source: dict | None = None,
    ) -> None:
        mask = np.ascontiguousarray(np.asarray(mask, dtype=bool))
        if mask.ndim != 2:
            raise ValueError("mask must be a 2-D array")
        if not mask.any():
            raise ValueError("shape mask has an empty inside set")
        if cell <= 0:
            raise ValueError("cell size must be positive")
        self.mask = mask
        self.mask.setflags(write=False)
        self.origin = (float(origin[0]), float(origin[1]))
        self.cell = float(cell)
        self.source = dict(source or {})
        rows, cols = mask.shape
        self.bbox = (
            self.origin[0],
            self.origin[1],
            self.origin[0] + cols * self.cell,
            self.origin[1] + rows * self.cell,
        )
        # Distance transform of the outside set: nearest inside cell per cell.
        _, indices = ndimage.distance_transform_edt(~mask, return_indices=True)
        self._near_rows = indices[0]
        self._near_cols = indices[1]
        eroded = ndimage.binary_erosion(mask, border_value=0)
        brows, bcols = np.nonzero(mask & ~eroded)
        self._boundary_xy = np.stack(
            [
                self.origin[0] + (bcols + 0.5) * self.cell,
                self.origin[1] + (brows + 0.5) * self.cell,
            ],
            axis=1,
        )
        self.inside_cell_count = int(mask.sum())

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_mask_array(cls, mask: np.ndarray, min_resolution: int = MIN_MASK_RESOLUTION,
                        source: dict | None = None) -> "ShapeRegion":
        """Build from a raster mask, upsampling below the resolution floor."""
        mask = np.asarray(mask, dtype=bool)
        longest = max(mask.shape)
        if longest < min_resolution:
            factor = -(-min_resolution // longest)  # ceil division
            mask = np.kron(mask, np.ones((factor, factor), dtype=bool))
            return cls(mask, origin=(0.0, 0.0), cell=1.0 / factor, source=source)
        return cls(mask, source=source)

    @classmethod
    def from_mask_image(cls, path, min_resolution: int = MIN_MASK_RESOLUTION) -> "ShapeRegion":
        """Load a grayscale image mask; nonzero pixels are inside."""
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"))
        return cls.from_mask_array(arr > 0, min_resolution=min_resolution,
                                   source={"kind": "mask", "path": str(path)})

    @classmethod
    def from_polygon(cls, points: Sequence[tuple[float, float]],
                     resolution: int = DEFAULT_RASTER_RESOLUTION) -> "ShapeRegion":
        """Rasterize a closed polygon at ``resolution`` cells on the longest side."""
        if len(points) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        pts = [(float(x), float(y)) for x, y in points]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        x0, y0, x1, y1 = min(xs), min(ys), max(xs), max(ys)
        span = max(x1 - x0, y1 - y0)
        if span <= 0:
            raise ValueError("polygon is degenerate")
        cell = span / resolution
        cols = max(1, int(math.ceil((x1 - x0) / cell)))
        rows = max(1, int(math.ceil((y1 - y0) / cell)))
        img = Image.new("1", (cols, rows), 0)
        draw = ImageDraw.Draw(img)
        pixel_pts = [((x - x0) / cell, (y - y0) / cell) for x, y in pts]
        draw.polygon(pixel_pts, fill=1)
        mask = np.asarray(img, dtype=bool)
        return cls(mask, origin=(x0, y0), cell=cell,
                   source={"kind": "polygon", "points": pts, "resolution": resolution})

    @classmethod
    def rectangle(cls, width: float, height: float,
                  resolution: int = DEFAULT_RASTER_RESOLUTION) -> "ShapeRegion":
        """Full-rectangle region of the given extent."""
        span = max(width, height)
        cell = span / resolution
        cols = max(1, int(round(width / cell)))
        rows = max(1, int(round(height / cell)))
        mask = np.ones((rows, cols), dtype=bool)
        return cls(mask, origin=(0.0, 0.0), cell=cell,
                   source={"kind": "rectangle", "width": width, "height": height})

    # -- queries -----------------------------------------------------------

    def _cell_of(self, x: float, y: float) -> tuple[int, int]:
        col = int(math.floor((x - self.origin[0]) / self.cell))
        row = int(math.floor((y - self.origin[1]) / self.cell))
        return row, col

    def _cell_center(self, row: int, col: int) -> tuple[float, float]:
        return (
            self.origin[0] + (col + 0.5) * self.cell,
            self.origin[1] + (row + 0.5) * self.cell,
        )

    def contains(self, p: tuple[float, float]) -> bool:
        row, col = self._cell_of(p[0], p[1])
        rows, cols = self.mask.shape
        if not (0 <= row < rows and 0 <= col < cols):
            return False
        return bool(self.mask[row, col])

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        cols = np.floor((pts[:, 0] - self.origin[0]) / self.cell).astype(np.int64)
        rows = np.floor((pts[:, 1] - self.origin[1]) / self.cell).astype(np.int64)
        nrows, ncols = self.mask.shape
        in_grid = (rows >= 0) & (rows < nrows) & (cols >= 0) & (cols < ncols)
        out = np.zeros(len(pts), dtype=bool)
        idx = np.nonzero(in_grid)[0]
        out[idx] = self.mask[rows[idx], cols[idx]]
        return out

    def nearest_inside(self, p: tuple[float, float]) -> tuple[tuple[float, float], float]:
        """Closest inside point to ``p`` and its Euclidean distance.

        Returns ``(p, 0.0)`` when the point is already inside. Outside points
        resolve to an inside cell center: via the distance transform when the
        point lies on the grid, else via the boundary cell list.
        """
        x, y = float(p[0]), float(p[1])
        if self.contains((x, y)):
            return (x, y), 0.0
        row, col = self._cell_of(x, y)
        rows, cols = self.mask.shape
        if 0 <= row < rows and 0 <= col < cols:
            nr = int(self._near_rows[row, col])
            nc = int(self._near_cols[row, col])
            qx, qy = self._cell_center(nr, nc)
        else:
            d2 = (self._boundary_xy[:, 0] - x) ** 2 + (self._boundary_xy[:, 1] - y) ** 2
            k = int(np.argmin(d2))
            qx, qy = float(self._boundary_xy[k, 0]), float(self._boundary_xy[k, 1])
        return (qx, qy), math.hypot(qx - x, qy - y)

    def nearest_inside_many(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized nearest_inside over an (N, 2) array of points."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        out_pts = pts.copy()
        dists = np.zeros(len(pts))
        inside = self.contains_many(pts)
        for i in np.nonzero(~inside)[0]:
            (qx, qy), d = self.nearest_inside((pts[i, 0], pts[i, 1]))
            out_pts[i] = (qx, qy)
            dists[i] = d
        return out_pts, dists

    # -- footprints --------------------------------------------------------

    def cell_span(self, rect: Rect) -> tuple[int, int, int, int]:
        """Unclipped [row0, row1) x [col0, col1) range of cells whose centers
        fall inside the rectangle."""
        col0 = int(math.ceil((rect.left - self.origin[0]) / self.cell - 0.5))
        col1 = int(math.floor((rect.right - self.origin[0]) / self.cell - 0.5)) + 1
        row0 = int(math.ceil((rect.top - self.origin[1]) / self.cell - 0.5))
        row1 = int(math.floor((rect.bottom - self.origin[1]) / self.cell - 0.5)) + 1
        return row0, row1, col0, col1

    def clip_span(self, span: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
        rows, cols = self.mask.shape
        r0, r1, c0, c1 = span
        return max(r0, 0), min(r1, rows), max(c0, 0), min(c1, cols)


def bad_pixel_count(target: Rect, others: Sequence[Rect], shape: ShapeRegion) -> int:
    """Cells of the target's footprint outside the shape or covered by others.

    Footprints are the grid cells whose centers fall inside a rectangle,
    evaluated at the shape's raster resolution; cells off the grid count as
    outside the shape.
    """
    span = shape.cell_span(target)
    r0, r1, c0, c1 = span
    total = max(0, r1 - r0) * max(0, c1 - c0)
    if total == 0:
        return 0
    cr0, cr1, cc0, cc1 = shape.clip_span(span)
    in_grid = max(0, cr1 - cr0) * max(0, cc1 - cc0)
    off_grid = total - in_grid
    if in_grid == 0:
        return total
    bad = ~shape.mask[cr0:cr1, cc0:cc1]
    covered = np.zeros_like(bad)
    for other in others:
        o_span = shape.cell_span(other)
        orr0, orr1, occ0, occ1 = o_span
        rr0, rr1 = max(orr0, cr0), min(orr1, cr1)
        qq0, qq1 = max(occ0, cc0), min(occ1, cc1)
        if rr0 < rr1 and qq0 < qq1:
            covered[rr0 - cr0:rr1 - cr0, qq0 - cc0:qq1 - cc0] = True
    return off_grid + int(np.count_nonzero(bad | covered))
