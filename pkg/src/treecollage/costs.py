"""Layout state, cost weights, and the cost terms of the layout objective.

Every cost is a mean over the images it is evaluated on, so empty selections
cost 0. The exponential falloff terms use a per-image scale chosen so that a
displacement of exactly one diagonal costs ``curvature``; correlation uses the
parent's current diagonal, the level and shape terms use the image's own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import Rect, ShapeRegion, overlap_areas_vs, pairwise_overlap_matrix
from .hyperbolic import InitialLayout
from .tree import ImageTree

# Default size bounds relative to the initial layout sizes.
LOWER_BOUND_FACTOR = 0.8
UPPER_BOUND_FACTOR = 1.2


@dataclass
class CostParams:
    """Weights, thresholds, and solver caps for layout optimization.

    Defaults keep the correlation and level weights equal, the size weight a
    third of them, and the overlap/shape weights two orders of magnitude
    larger so those constraints dominate.
    """

    w_corr: float = 1.0
    w_level: float = 1.0
    w_size: float = 1.0 / 3.0
    w_overlap: float = 100.0
    w_shape: float = 100.0
    curvature: float = 0.5
    max_overlap: float = 0.0
    level_iters: int = 200
    outside_pass_iters: int = 30
    rel_tol: float = 1e-4

    def __post_init__(self) -> None:
        for name in ("w_corr", "w_level", "w_size", "w_overlap", "w_shape"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0.0 < self.curvature < 1.0:
            raise ValueError("curvature must be in (0, 1)")
        if self.max_overlap < 0:
            raise ValueError("max_overlap must be non-negative")

    @property
    def falloff_factor(self) -> float:
        # scale multiplier turning a diagonal into the exponential scale
        return -1.0 / math.log(1.0 - self.curvature)


class LayoutState:
    """Mutable positions, sizes, and size bounds for every image.

    Arrays are indexed by the fixed ``ids`` order; ``index`` maps id to row.
    """

    def __init__(
        self,
        ids: Sequence[str],
        x: np.ndarray,
        y: np.ndarray,
        w: np.ndarray,
        h: np.ndarray,
        w_lo: np.ndarray,
        w_hi: np.ndarray,
        h_lo: np.ndarray,
        h_hi: np.ndarray,
    ) -> None:
        self.ids = tuple(ids)
        self.index = {node_id: i for i, node_id in enumerate(self.ids)}
        self.x = np.asarray(x, dtype=np.float64).copy()
        self.y = np.asarray(y, dtype=np.float64).copy()
        self.w = np.asarray(w, dtype=np.float64).copy()
        self.h = np.asarray(h, dtype=np.float64).copy()
        self.w_lo = np.asarray(w_lo, dtype=np.float64).copy()
        self.w_hi = np.asarray(w_hi, dtype=np.float64).copy()
        self.h_lo = np.asarray(h_lo, dtype=np.float64).copy()
        self.h_hi = np.asarray(h_hi, dtype=np.float64).copy()
        n = len(self.ids)
        for arr in (self.x, self.y, self.w, self.h, self.w_lo, self.w_hi, self.h_lo, self.h_hi):
            if arr.shape != (n,):
                raise ValueError("layout arrays must be 1-D with one entry per id")
        if np.any(self.w_lo > self.w_hi) or np.any(self.h_lo > self.h_hi):
            raise ValueError("size bounds must satisfy lower <= upper")
        if np.any(self.w_lo <= 0) or np.any(self.h_lo <= 0):
            raise ValueError("size bounds must be positive")

    @classmethod
    def from_initial(
        cls,
        initial: InitialLayout,
        order: Sequence[str],
        lower: float = LOWER_BOUND_FACTOR,
        upper: float = UPPER_BOUND_FACTOR,
    ) -> "LayoutState":
        xs = np.array([initial.positions[i][0] for i in order])
        ys = np.array([initial.positions[i][1] for i in order])
        ws = np.array([initial.sizes[i][0] for i in order])
        hs = np.array([initial.sizes[i][1] for i in order])
        return cls(order, xs, ys, ws, hs, lower * ws, upper * ws, lower * hs, upper * hs)

    def copy(self) -> "LayoutState":
        return LayoutState(
            self.ids, self.x, self.y, self.w, self.h,
            self.w_lo, self.w_hi, self.h_lo, self.h_hi,
        )

    def __len__(self) -> int:
        return len(self.ids)

    def rect(self, node_id: str) -> Rect:
        i = self.index[node_id]
        return Rect(self.x[i], self.y[i], self.w[i], self.h[i])

    def rect_at(self, i: int) -> Rect:
        return Rect(self.x[i], self.y[i], self.w[i], self.h[i])

    def diagonals(self) -> np.ndarray:
        return np.hypot(self.w, self.h)

    def areas(self) -> np.ndarray:
        return self.w * self.h

    def centers(self) -> np.ndarray:
        return np.stack([self.x, self.y], axis=1)


def _indices(layout: LayoutState, ids: Iterable[str]) -> np.ndarray:
    return np.array([layout.index[i] for i in ids], dtype=np.int64)


def parent_indices(layout: LayoutState, tree: ImageTree) -> np.ndarray:
    return np.array([layout.index[tree.parents[i]] for i in layout.ids], dtype=np.int64)


# -- cost terms --------------------------------------------------------------


def correlation_cost(
    layout: LayoutState,
    tree: ImageTree,
    ids: Sequence[str] | None = None,
    curvature: float = 0.5,
) -> float:
    """Mean falloff cost of child-to-parent distances over ``ids``.

    Root entries are skipped; the falloff scale comes from the parent's
    current diagonal.
    """
    sel = [i for i in (ids if ids is not None else layout.ids) if i != tree.root_id]
    if not sel:
        return 0.0
    factor = -1.0 / math.log(1.0 - curvature)
    idx = _indices(layout, sel)
    pidx = np.array([layout.index[tree.parents[i]] for i in sel], dtype=np.int64)
    d = np.hypot(layout.x[idx] - layout.x[pidx], layout.y[idx] - layout.y[pidx])
    scale = np.hypot(layout.w[pidx], layout.h[pidx]) * factor
    return float(np.mean(1.0 - np.exp(-d / scale)))


def correlation_cost_grad(
    layout: LayoutState,
    tree: ImageTree,
    ids: Sequence[str],
    curvature: float = 0.5,
) -> np.ndarray:
    """Gradient of correlation_cost w.r.t. (x, y, w, h) of each id, shape (n, 4).

    Parents are treated as fixed, matching level-restricted evaluation.
    """
    grad = np.zeros((len(ids), 4))
    sel = [(k, i) for k, i in enumerate(ids) if i != tree.root_id]
    if not sel:
        return grad
    factor = -1.0 / math.log(1.0 - curvature)
    n = len(sel)
    for k, node in sel:
        i = layout.index[node]
        p = layout.index[tree.parents[node]]
        dx = layout.x[i] - layout.x[p]
        dy = layout.y[i] - layout.y[p]
        d = math.hypot(dx, dy)
        if d == 0.0:
            continue
        scale = math.hypot(layout.w[p], layout.h[p]) * factor
        coeff = math.exp(-d / scale) / (scale * d) / n
        grad[k, 0] = coeff * dx
        grad[k, 1] = coeff * dy
    return grad


def level_cost(
    layout: LayoutState,
    tree: ImageTree,
    radii: Sequence[float],
    ids: Sequence[str] | None = None,
    curvature: float = 0.5,
) -> float:
    """Mean falloff cost of each image's root-distance error from its level radius."""
    sel = [i for i in (ids if ids is not None else layout.ids) if i != tree.root_id]
    if not sel:
        return 0.0
    factor = -1.0 / math.log(1.0 - curvature)
    idx = _indices(layout, sel)
    r = layout.index[tree.root_id]
    d = np.hypot(layout.x[idx] - layout.x[r], layout.y[idx] - layout.y[r])
    target = np.array([radii[tree.levels[i]] for i in sel])
    scale = np.hypot(layout.w[idx], layout.h[idx]) * factor
    return float(np.mean(1.0 - np.exp(-np.abs(d - target) / scale)))


def level_cost_grad(
    layout: LayoutState,
    tree: ImageTree,
    radii: Sequence[float],
    ids: Sequence[str],
    curvature: float = 0.5,
) -> np.ndarray:
    """Gradient of level_cost w.r.t. (x, y, w, h) of each id, shape (n, 4)."""
    grad = np.zeros((len(ids), 4))
    sel = [(k, i) for k, i in enumerate(ids) if i != tree.root_id]
    if not sel:
        return grad
    factor = -1.0 / math.log(1.0 - curvature)
    n = len(sel)
    r = layout.index[tree.root_id]
    for k, node in sel:
        i = layout.index[node]
        dx = layout.x[i] - layout.x[r]
        dy = layout.y[i] - layout.y[r]
        d = math.hypot(dx, dy)
        u = d - radii[tree.levels[node]]
        diag = math.hypot(layout.w[i], layout.h[i])
        scale = diag * factor
        e = math.exp(-abs(u) / scale)
        if d > 0.0 and u != 0.0:
            coeff = e * math.copysign(1.0, u) / (scale * d) / n
            grad[k, 0] = coeff * dx
            grad[k, 1] = coeff * dy
        if u != 0.0:
            # larger image -> larger scale -> lower cost
            dscale_dw = factor * layout.w[i] / diag
            dscale_dh = factor * layout.h[i] / diag
            dcost_dscale = -e * abs(u) / (scale * scale) / n
            grad[k, 2] = dcost_dscale * dscale_dw
            grad[k, 3] = dcost_dscale * dscale_dh
    return grad


def size_cost(layout: LayoutState, ids: Sequence[str] | None = None) -> float:
    """Mean remaining headroom to the upper size bound, 0 at the top, 1 at the bottom."""
    sel = list(ids if ids is not None else layout.ids)
    if not sel:
        return 0.0
    idx = _indices(layout, sel)
    hi = layout.w_hi[idx] * layout.h_hi[idx]
    lo = layout.w_lo[idx] * layout.h_lo[idx]
    span = hi - lo
    if np.any(span <= 0):
        bad = sel[int(np.nonzero(span <= 0)[0][0])]
        raise ValueError(f"image {bad!r}: size bounds give an empty area range")
    return float(np.mean((hi - layout.w[idx] * layout.h[idx]) / span))


def size_cost_grad(layout: LayoutState, ids: Sequence[str]) -> np.ndarray:
    """Gradient of size_cost w.r.t. (x, y, w, h) of each id, shape (n, 4)."""
    grad = np.zeros((len(ids), 4))
    if not ids:
        return grad
    idx = _indices(layout, ids)
    span = layout.w_hi[idx] * layout.h_hi[idx] - layout.w_lo[idx] * layout.h_lo[idx]
    grad[:, 2] = -layout.h[idx] / span / len(ids)
    grad[:, 3] = -layout.w[idx] / span / len(ids)
    return grad


def overlap_cost(
    layout: LayoutState,
    tree: ImageTree,
    level: int,
    max_overlap: float = 0.0,
) -> float:
    """Mean excess overlap ratio of level images against all placed images.

    Placed means levels up to and including ``level``; each image's overlap
    sum is normalized by its own area before the threshold is applied.
    """
    sel = [i for i in layout.ids if tree.levels[i] == level]
    if not sel:
        return 0.0
    placed = [i for i in layout.ids if tree.levels[i] <= level]
    sidx = _indices(layout, sel)
    pidx = _indices(layout, placed)
    total = np.zeros(len(sel))
    for k, i in enumerate(sidx):
        areas = overlap_areas_vs(
            layout.x[i], layout.y[i], layout.w[i], layout.h[i],
            layout.x[pidx], layout.y[pidx], layout.w[pidx], layout.h[pidx],
        )
        areas[pidx == i] = 0.0
        total[k] = areas.sum() / (layout.w[i] * layout.h[i])
    return float(np.mean(np.maximum(total - max_overlap, 0.0)))


def shape_cost(
    layout: LayoutState,
    shape: ShapeRegion,
    ids: Sequence[str],
    curvature: float = 0.5,
) -> float:
    """Mean falloff cost of outside centers' distance back to the shape."""
    sel = list(ids)
    if not sel:
        return 0.0
    factor = -1.0 / math.log(1.0 - curvature)
    idx = _indices(layout, sel)
    centers = np.stack([layout.x[idx], layout.y[idx]], axis=1)
    inside = shape.contains_many(centers)
    if inside.all():
        return 0.0
    total = 0.0
    for k in np.nonzero(~inside)[0]:
        i = idx[k]
        _, d = shape.nearest_inside((layout.x[i], layout.y[i]))
        scale = math.hypot(layout.w[i], layout.h[i]) * factor
        total += 1.0 - math.exp(-d / scale)
    return total / len(sel)


def level_objective(
    layout: LayoutState,
    tree: ImageTree,
    radii: Sequence[float],
    shape: ShapeRegion,
    params: CostParams,
    level: int,
) -> float:
    """Weighted sum of all five cost terms, restricted to one tree level."""
    ids = [i for i in layout.ids if tree.levels[i] == level]
    return (
        params.w_corr * correlation_cost(layout, tree, ids, params.curvature)
        + params.w_level * level_cost(layout, tree, radii, ids, params.curvature)
        + params.w_size * size_cost(layout, ids)
        + params.w_overlap * overlap_cost(layout, tree, level, params.max_overlap)
        + params.w_shape * shape_cost(layout, shape, ids, params.curvature)
    )


def overlap_ratios_all(layout: LayoutState) -> np.ndarray:
    """Per-image total overlap ratio against every other image."""
    if len(layout) == 1:
        return np.zeros(1)
    matrix = pairwise_overlap_matrix(layout.x, layout.y, layout.w, layout.h)
    return matrix.sum(axis=1) / layout.areas()
