"""Two-step layout optimization.

Step one solves the weighted objective level by level with a projected
finite-difference gradient descent (size boxes enforced at every iterate,
non-improving steps rejected). Step two adjusts the result locally: outside
centers are snapped back into the shape, residual overlaps are removed by
shrinking the worst pair, and a discrete local search grows images into the
remaining blank space without creating new overlap or coverage violations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .costs import CostParams, LayoutState, level_objective, overlap_ratios_all
from .geometry import Rect, ShapeRegion, bad_pixel_count, overlap_areas_vs, pairwise_overlap_matrix
from .hyperbolic import InitialLayout, project
from .model import ImageItem, PropertySchema
from .tree import ImageTree, build_tree, is_unbalanced, order_collection, select_root, transfer_tree

DEFAULT_SCALE_STEPS = (1.0, 1.05, 1.10, 1.15, 1.20, 1.25, 1.30, 1.35)
DEFAULT_ASPECT_STEPS = (0.9, 1.0, 1.1)
ASPECT_WINDOW = (2.0 / 3.0, 3.0 / 2.0)
SHRINK_FACTOR = 0.95
SHRINK_FLOOR = 0.5  # fraction of the lower size bound scaling may reach


class LayoutInfeasibleError(RuntimeError):
    """Raised when overlap resolution cannot reach the allowed threshold."""

    def __init__(self, pair: tuple[str, str], ratio: float) -> None:
        self.pair = pair
        self.ratio = ratio
        super().__init__(
            f"cannot reduce overlap between {pair[0]!r} and {pair[1]!r} "
            f"below the allowed threshold (worst ratio {ratio:.4f})"
        )


@dataclass
class TuningParams:
    """Knobs for the local adjustment passes."""

    tune_range: float | None = None  # None: half the mean image diagonal at entry
    grid_step: float | None = None  # None: tune_range / 4
    scale_steps: tuple[float, ...] = DEFAULT_SCALE_STEPS
    aspect_steps: tuple[float, ...] = DEFAULT_ASPECT_STEPS
    max_outside_iters: int = 10
    max_scaling_iters: int = 500

    def __post_init__(self) -> None:
        if self.tune_range is not None and self.tune_range <= 0:
            raise ValueError("tune_range must be positive")
        if self.grid_step is not None and self.grid_step <= 0:
            raise ValueError("grid_step must be positive")
        if any(s < 1.0 for s in self.scale_steps):
            raise ValueError("scale steps must be >= 1")
        if self.max_outside_iters < 1 or self.max_scaling_iters < 1:
            raise ValueError("iteration caps must be at least 1")


@dataclass
class LevelTrace:
    """Objective values of one per-level solve, including the starting value."""

    level: int
    phase: str  # "global" or "outside"
    objectives: list[float]


@dataclass
class StepSummary:
    """Constraint snapshot around one pipeline sub-step."""

    step: str
    entry_max_overlap: float
    exit_max_overlap: float
    entry_outside: int
    exit_outside: int


@dataclass
class OptimizationTrace:
    level_traces: list[LevelTrace] = field(default_factory=list)
    steps: list[StepSummary] = field(default_factory=list)
    lower_bound_breaches: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "levels": [
                {
                    "level": t.level,
                    "phase": t.phase,
                    "iterations": len(t.objectives) - 1,
                    "initial": t.objectives[0],
                    "final": t.objectives[-1],
                }
                for t in self.level_traces
            ],
            "steps": [
                {
                    "step": s.step,
                    "entry_max_overlap": s.entry_max_overlap,
                    "exit_max_overlap": s.exit_max_overlap,
                    "entry_outside": s.entry_outside,
                    "exit_outside": s.exit_outside,
                }
                for s in self.steps
            ],
            "lower_bound_breaches": list(self.lower_bound_breaches),
        }


def _outside_count(layout: LayoutState, shape: ShapeRegion) -> int:
    return int((~shape.contains_many(layout.centers())).sum())


def _max_overlap_ratio(layout: LayoutState) -> float:
    return float(overlap_ratios_all(layout).max()) if len(layout) else 0.0


def _snapshot(step: str, layout: LayoutState, shape: ShapeRegion) -> StepSummary:
    mo = _max_overlap_ratio(layout)
    out = _outside_count(layout, shape)
    return StepSummary(step, mo, mo, out, out)


def _close_snapshot(summary: StepSummary, layout: LayoutState, shape: ShapeRegion) -> None:
    summary.exit_max_overlap = _max_overlap_ratio(layout)
    summary.exit_outside = _outside_count(layout, shape)


# -- global optimization -----------------------------------------------------


class _LevelProblem:
    """Partial-objective evaluation for one level's finite-difference gradient.

    Perturbing one image touches only the objective terms that involve it, so
    the central difference of the full objective equals the difference of
    this partial sum; overlap interactions with the other images of the level
    go through cached per-image totals.
    """

    def __init__(
        self,
        layout: LayoutState,
        tree: ImageTree,
        radii: Sequence[float],
        shape: ShapeRegion,
        params: CostParams,
        level: int,
    ) -> None:
        self.layout = layout
        self.tree = tree
        self.radii = radii
        self.shape = shape
        self.params = params
        self.level = level
        self.sel = np.array(
            [layout.index[i] for i in layout.ids if tree.levels[i] == level], dtype=np.int64
        )
        self.placed = np.array(
            [layout.index[i] for i in layout.ids if tree.levels[i] <= level], dtype=np.int64
        )
        self.n_sel = len(self.sel)
        self.factor = params.falloff_factor
        self.parent_idx = np.array(
            [layout.index[tree.parents[layout.ids[i]]] for i in self.sel], dtype=np.int64
        )
        self.root_idx = layout.index[tree.root_id]
        self.targets = np.array([radii[tree.levels[layout.ids[i]]] for i in self.sel])
        # position of each placed image inside the placed array
        self.placed_pos = {int(p): k for k, p in enumerate(self.placed)}
        self.sel_pos = np.array([self.placed_pos[int(s)] for s in self.sel], dtype=np.int64)

    def refresh_overlaps(self) -> None:
        lay = self.layout
        self.ov = np.empty((self.n_sel, len(self.placed)))
        for k, i in enumerate(self.sel):
            col = overlap_areas_vs(
                lay.x[i], lay.y[i], lay.w[i], lay.h[i],
                lay.x[self.placed], lay.y[self.placed], lay.w[self.placed], lay.h[self.placed],
            )
            col[self.placed == i] = 0.0
            self.ov[k] = col
        self.own_area = lay.w[self.sel] * lay.h[self.sel]
        self.ratio_sum = self.ov.sum(axis=1) / self.own_area

    def partial(self, k: int, x: float, y: float, w: float, h: float, base: np.ndarray) -> float:
        """All objective terms that depend on image ``k`` of the level, with
        that image's rect replaced by (x, y, w, h).

        ``base`` holds the other level images' overlap ratios with image k's
        contribution removed, so only k's new column needs recomputing.
        """
        lay = self.layout
        p = self.params
        i = int(self.sel[k])
        n = self.n_sel
        # correlation
        pi = int(self.parent_idx[k])
        d = math.hypot(x - lay.x[pi], y - lay.y[pi])
        sigma = math.hypot(lay.w[pi], lay.h[pi]) * self.factor
        term = p.w_corr * (1.0 - math.exp(-d / sigma)) / n
        # level radius
        dr = math.hypot(x - lay.x[self.root_idx], y - lay.y[self.root_idx])
        rho = math.hypot(w, h) * self.factor
        term += p.w_level * (1.0 - math.exp(-abs(dr - self.targets[k]) / rho)) / n
        # size
        hi = lay.w_hi[i] * lay.h_hi[i]
        lo = lay.w_lo[i] * lay.h_lo[i]
        term += p.w_size * ((hi - w * h) / (hi - lo)) / n
        # overlap: own ratio plus the change induced in the level's other images
        col = overlap_areas_vs(
            x, y, w, h,
            lay.x[self.placed], lay.y[self.placed], lay.w[self.placed], lay.h[self.placed],
        )
        col[self.placed == i] = 0.0
        own = max(col.sum() / (w * h) - p.max_overlap, 0.0)
        others = np.maximum(base + col[self.sel_pos] / self.own_area - p.max_overlap, 0.0)
        term += p.w_overlap * (own + others.sum() - others[k]) / n
        # shape
        if not self.shape.contains((x, y)):
            _, dm = self.shape.nearest_inside((x, y))
            term += p.w_shape * (1.0 - math.exp(-dm / rho)) / n
        return term

    def gradient(self, h_pos: float) -> np.ndarray:
        """Central-difference gradient over (x, y, w, h) per level image."""
        lay = self.layout
        self.refresh_overlaps()
        grad = np.zeros((self.n_sel, 4))
        for k in range(self.n_sel):
            i = int(self.sel[k])
            base = self.ratio_sum - self.ov[:, self.placed_pos[i]] / self.own_area
            x, y, w, h = lay.x[i], lay.y[i], lay.w[i], lay.h[i]
            hw = max(1e-6, 1e-4 * (lay.w_hi[i] - lay.w_lo[i]))
            hh = max(1e-6, 1e-4 * (lay.h_hi[i] - lay.h_lo[i]))
            grad[k, 0] = (self.partial(k, x + h_pos, y, w, h, base) - self.partial(k, x - h_pos, y, w, h, base)) / (2 * h_pos)
            grad[k, 1] = (self.partial(k, x, y + h_pos, w, h, base) - self.partial(k, x, y - h_pos, w, h, base)) / (2 * h_pos)
            grad[k, 2] = (self.partial(k, x, y, w + hw, h, base) - self.partial(k, x, y, w - hw, h, base)) / (2 * hw)
            grad[k, 3] = (self.partial(k, x, y, w, h + hh, base) - self.partial(k, x, y, w, h - hh, base)) / (2 * hh)
        return grad


def _solve_level(
    layout: LayoutState,
    tree: ImageTree,
    radii: Sequence[float],
    shape: ShapeRegion,
    params: CostParams,
    level: int,
    max_iters: int,
    trace: OptimizationTrace | None,
    phase: str,
) -> None:
    problem = _LevelProblem(layout, tree, radii, shape, params, level)
    if problem.n_sel == 0:
        return
    sel = problem.sel
    bbox = shape.bbox
    bbox_diag = math.hypot(bbox[2] - bbox[0], bbox[3] - bbox[1])
    h_pos = 1e-4 * bbox_diag

    f = level_objective(layout, tree, radii, shape, params, level)
    objectives = [f]
    t_prev: float | None = None
    for _ in range(max_iters):
        if f <= 0.0:
            break
        grad = problem.gradient(h_pos)
        gmax = float(np.abs(grad).max())
        if gmax == 0.0:
            break
        t = t_prev * 2.0 if t_prev is not None else 0.05 * bbox_diag / gmax
        saved = (layout.x[sel].copy(), layout.y[sel].copy(), layout.w[sel].copy(), layout.h[sel].copy())
        accepted = False
        for _ in range(40):
            layout.x[sel] = saved[0] - t * grad[:, 0]
            layout.y[sel] = saved[1] - t * grad[:, 1]
            layout.w[sel] = np.clip(saved[2] - t * grad[:, 2], layout.w_lo[sel], layout.w_hi[sel])
            layout.h[sel] = np.clip(saved[3] - t * grad[:, 3], layout.h_lo[sel], layout.h_hi[sel])
            f_new = level_objective(layout, tree, radii, shape, params, level)
            if f_new < f - 1e-15:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            layout.x[sel], layout.y[sel] = saved[0], saved[1]
            layout.w[sel], layout.h[sel] = saved[2], saved[3]
            break
        t_prev = t
        objectives.append(f_new)
        rel = (f - f_new) / max(f, 1e-12)
        f = f_new
        if rel < params.rel_tol:
            break
    if trace is not None:
        trace.level_traces.append(LevelTrace(level, phase, objectives))


def global_optimize(
    tree: ImageTree,
    initial: InitialLayout,
    shape: ShapeRegion,
    params: CostParams,
    trace: OptimizationTrace | None = None,
) -> LayoutState:
    """Per-level descent on the full objective, deepest level last.

    Positions and sizes of each level are optimized with earlier levels
    frozen; size boxes (0.8x to 1.2x the initial sizes) hold at every iterate.
    """
    layout = LayoutState.from_initial(initial, tree.order)
    for level in range(1, tree.depth + 1):
        _solve_level(
            layout, tree, initial.level_radii, shape, params, level,
            params.level_iters, trace, "global",
        )
    return layout


# -- local adjustment --------------------------------------------------------


def move_outside_images(
    layout: LayoutState,
    tree: ImageTree,
    radii: Sequence[float],
    shape: ShapeRegion,
    params: CostParams,
    tuning: TuningParams,
    trace: OptimizationTrace | None = None,
) -> LayoutState:
    """Snap outside centers into the shape, re-solving the touched levels.

    Ends with every center inside the shape: when the iteration cap is hit a
    final snap without a re-solve is applied.
    """
    summary = _snapshot("move_outside", layout, shape)
    for _ in range(tuning.max_outside_iters):
        outside = np.nonzero(~shape.contains_many(layout.centers()))[0]
        if len(outside) == 0:
            break
        levels = sorted({tree.levels[layout.ids[i]] for i in outside})
        for i in outside:
            (qx, qy), _ = shape.nearest_inside((layout.x[i], layout.y[i]))
            layout.x[i] = qx
            layout.y[i] = qy
        for level in levels:
            _solve_level(
                layout, tree, radii, shape, params, level,
                params.outside_pass_iters, trace, "outside",
            )
    outside = np.nonzero(~shape.contains_many(layout.centers()))[0]
    for i in outside:
        (qx, qy), _ = shape.nearest_inside((layout.x[i], layout.y[i]))
        layout.x[i] = qx
        layout.y[i] = qy
    if trace is not None:
        _close_snapshot(summary, layout, shape)
        trace.steps.append(summary)
    return layout


def resolve_overlaps_by_scaling(
    layout: LayoutState,
    tree: ImageTree,
    shape: ShapeRegion,
    max_overlap: float = 0.0,
    max_iters: int = 500,
    trace: OptimizationTrace | None = None,
) -> LayoutState:
    """Shrink (or, at the size floor, separate) overlapping pairs until every
    image's overlap ratio is within the allowed threshold.

    Each round picks the pair with the largest overlap area and shrinks both
    about their centers, aspect preserved, never below half the lower size
    bound. When both members are already at the floor the smaller one is
    translated just far enough to separate and its center snapped back inside
    the shape. Raises LayoutInfeasibleError if the cap is exhausted.
    """
    summary = _snapshot("resolve_overlaps", layout, shape)
    floor_w = SHRINK_FLOOR * layout.w_lo
    floor_h = SHRINK_FLOOR * layout.h_lo
    n = len(layout)
    done = False
    for _ in range(max_iters):
        matrix = pairwise_overlap_matrix(layout.x, layout.y, layout.w, layout.h)
        ratios = matrix.sum(axis=1) / layout.areas()
        if np.all(ratios <= max_overlap):
            done = True
            break
        flat = int(np.argmax(matrix))
        a, b = divmod(flat, n)
        shrink_a = max(SHRINK_FACTOR, floor_w[a] / layout.w[a], floor_h[a] / layout.h[a])
        shrink_b = max(SHRINK_FACTOR, floor_w[b] / layout.w[b], floor_h[b] / layout.h[b])
        if shrink_a >= 1.0 and shrink_b >= 1.0:
            small, big = (a, b) if layout.areas()[a] <= layout.areas()[b] else (b, a)
            _separate(layout, small, big, shape)
        else:
            if shrink_a < 1.0:
                layout.w[a] *= shrink_a
                layout.h[a] *= shrink_a
            if shrink_b < 1.0:
                layout.w[b] *= shrink_b
                layout.h[b] *= shrink_b
    if not done:
        matrix = pairwise_overlap_matrix(layout.x, layout.y, layout.w, layout.h)
        ratios = matrix.sum(axis=1) / layout.areas()
        if not np.all(ratios <= max_overlap):
            flat = int(np.argmax(matrix))
            a, b = divmod(flat, n)
            raise LayoutInfeasibleError(
                (layout.ids[a], layout.ids[b]), float(ratios.max())
            )
    if trace is not None:
        _close_snapshot(summary, layout, shape)
        trace.steps.append(summary)
        for i in range(n):
            if layout.w[i] < layout.w_lo[i] - 1e-9 or layout.h[i] < layout.h_lo[i] - 1e-9:
                trace.lower_bound_breaches.append(
                    {
                        "id": layout.ids[i],
                        "w": float(layout.w[i]),
                        "h": float(layout.h[i]),
                        "w_lo": float(layout.w_lo[i]),
                        "h_lo": float(layout.h_lo[i]),
                    }
                )
    return layout


def _min_separating_offset(dx: float, dy: float, half_w: float, half_h: float,
                           ux: float, uy: float) -> float:
    """Smallest move of the first rect along (ux, uy) that ends the overlap."""
    if ux > 0.0:
        tx = (half_w - dx) / ux
    elif ux < 0.0:
        tx = (half_w + dx) / -ux
    else:
        tx = math.inf
    if uy > 0.0:
        ty = (half_h - dy) / uy
    elif uy < 0.0:
        ty = (half_h + dy) / -uy
    else:
        ty = math.inf
    return min(tx, ty)


def _separate(layout: LayoutState, small: int, big: int, shape: ShapeRegion) -> None:
    """Translate ``small`` until the pair stops overlapping, keeping its
    center inside the shape.

    The center-line direction is tried first, then the four axis directions;
    each candidate is snapped back inside the shape and kept only if the pair
    is separated afterwards (concave shapes can cancel a move). The smallest
    effective displacement wins; with no effective candidate the center-line
    move is applied anyway so the loop's cap decides feasibility.
    """
    sx, sy = layout.x[small], layout.y[small]
    dx = sx - layout.x[big]
    dy = sy - layout.y[big]
    half_w = (layout.w[small] + layout.w[big]) / 2.0
    half_h = (layout.h[small] + layout.h[big]) / 2.0
    norm = math.hypot(dx, dy)
    center_dir = (dx / norm, dy / norm) if norm > 0.0 else (1.0, 0.0)
    margin = 1e-9 * max(layout.w[small], layout.h[small], 1.0)
    big_rect = layout.rect_at(big)
    best: tuple[float, float, float] | None = None
    for ux, uy in (center_dir, (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)):
        t = _min_separating_offset(dx, dy, half_w, half_h, ux, uy)
        if not math.isfinite(t):
            continue
        t += margin
        (qx, qy), _ = shape.nearest_inside((sx + t * ux, sy + t * uy))
        moved = Rect(qx, qy, layout.w[small], layout.h[small])
        if overlap_areas_vs(qx, qy, moved.w, moved.h,
                            np.array([big_rect.cx]), np.array([big_rect.cy]),
                            np.array([big_rect.w]), np.array([big_rect.h]))[0] > 0.0:
            continue
        disp = math.hypot(qx - sx, qy - sy)
        if best is None or disp < best[0]:
            best = (disp, qx, qy)
    if best is not None:
        layout.x[small], layout.y[small] = best[1], best[2]
        return
    t = _min_separating_offset(dx, dy, half_w, half_h, *center_dir) + margin
    (qx, qy), _ = shape.nearest_inside((sx + t * center_dir[0], sy + t * center_dir[1]))
    layout.x[small], layout.y[small] = qx, qy


def local_tune(
    layout: LayoutState,
    tree: ImageTree,
    shape: ShapeRegion,
    params: CostParams,
    tuning: TuningParams,
    trace: OptimizationTrace | None = None,
) -> LayoutState:
    """Grow images into blank space with a bounded discrete search.

    Images are visited level by level from the root down. For each one,
    candidate placements on a position grid around the current center are
    combined with scaled sizes (aspect nudged within the 2:3 window, capped at
    the upper size bounds); a candidate is feasible when its center stays
    inside the shape, overlap ratios stay within the threshold for every
    image, and its bad-cell count (outside the shape or under another image)
    does not exceed the current one. The largest feasible area wins, with ties
    to the smallest displacement then smallest scale. Image area never
    decreases.
    """
    summary = _snapshot("local_tune", layout, shape)
    n = len(layout)
    diag_mean = float(np.mean(layout.diagonals()))
    t_range = tuning.tune_range if tuning.tune_range is not None else 0.5 * diag_mean
    step = tuning.grid_step if tuning.grid_step is not None else t_range / 4.0
    n_axis = max(1, int(round(2.0 * t_range / step)) + 1)

    matrix = pairwise_overlap_matrix(layout.x, layout.y, layout.w, layout.h)
    sums = matrix.sum(axis=1)

    visit = sorted(range(n), key=lambda i: (tree.levels[layout.ids[i]], i))
    for i in visit:
        cur = layout.rect_at(i)
        others = [layout.rect_at(q) for q in range(n) if q != i]
        cur_bad = bad_pixel_count(cur, others, shape)
        cands = _tune_candidates(layout, i, t_range, n_axis, tuning)
        if cands is None:
            continue
        cx, cy, cw, ch, scales = cands
        areas_c = cw * ch
        keep = areas_c > cur.area * (1.0 + 1e-12)
        if not keep.any():
            continue
        centers = np.stack([cx, cy], axis=1)
        keep &= shape.contains_many(centers)
        if not keep.any():
            continue
        idx = np.nonzero(keep)[0]
        ov = _candidate_overlaps(layout, i, cx[idx], cy[idx], cw[idx], ch[idx])
        own_ok = ov.sum(axis=1) <= params.max_overlap * areas_c[idx]
        base = sums - matrix[:, i]  # per-image overlap area excluding image i
        limits = params.max_overlap * layout.areas()
        within = (base[None, :] + ov) <= limits[None, :]
        within[:, i] = True
        idx = idx[own_ok & within.all(axis=1)]
        if len(idx) == 0:
            continue
        disp = (cx[idx] - cur.cx) ** 2 + (cy[idx] - cur.cy) ** 2
        ranked = sorted(
            range(len(idx)),
            key=lambda k: (-areas_c[idx[k]], disp[k], scales[idx[k]], idx[k]),
        )
        for k in ranked:
            c = int(idx[k])
            cand = Rect(float(cx[c]), float(cy[c]), float(cw[c]), float(ch[c]))
            if bad_pixel_count(cand, others, shape) <= cur_bad:
                layout.x[i], layout.y[i] = cand.cx, cand.cy
                layout.w[i], layout.h[i] = cand.w, cand.h
                col = overlap_areas_vs(cand.cx, cand.cy, cand.w, cand.h,
                                       layout.x, layout.y, layout.w, layout.h)
                col[i] = 0.0
                sums += col - matrix[:, i]
                matrix[:, i] = col
                matrix[i, :] = col
                sums[i] = col.sum()
                break
    if trace is not None:
        _close_snapshot(summary, layout, shape)
        trace.steps.append(summary)
    return layout


def _tune_candidates(
    layout: LayoutState,
    i: int,
    t_range: float,
    n_axis: int,
    tuning: TuningParams,
):
    """Grid of candidate (x, y, w, h, scale) tuples for one image."""
    x, y, w, h = layout.x[i], layout.y[i], layout.w[i], layout.h[i]
    xs = np.linspace(x - t_range, x + t_range, n_axis)
    ys = np.linspace(y - t_range, y + t_range, n_axis)
    ratio = h / w
    sizes: list[tuple[float, float, float]] = []
    seen: set[tuple[float, float]] = set()
    for s in tuning.scale_steps:
        for m in tuning.aspect_steps:
            r_new = min(max(ratio * m, ASPECT_WINDOW[0]), ASPECT_WINDOW[1])
            area = s * s * w * h
            cw = math.sqrt(area / r_new)
            chh = cw * r_new
            cap = min(1.0, layout.w_hi[i] / cw, layout.h_hi[i] / chh)
            cw *= cap
            chh *= cap
            key = (round(cw, 12), round(chh, 12))
            if key in seen:
                continue
            seen.add(key)
            sizes.append((s, cw, chh))
    if not sizes:
        return None
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    gx = gx.ravel()
    gy = gy.ravel()
    n_pos = len(gx)
    n_size = len(sizes)
    cx = np.repeat(gx, n_size)
    cy = np.repeat(gy, n_size)
    cw = np.tile(np.array([s[1] for s in sizes]), n_pos)
    ch = np.tile(np.array([s[2] for s in sizes]), n_pos)
    scales = np.tile(np.array([s[0] for s in sizes]), n_pos)
    return cx, cy, cw, ch, scales


def _candidate_overlaps(
    layout: LayoutState, i: int, cx: np.ndarray, cy: np.ndarray, cw: np.ndarray, ch: np.ndarray
) -> np.ndarray:
    """Overlap areas of each candidate against every image (own column zero)."""
    ox = np.minimum(cx[:, None] + cw[:, None] / 2, layout.x[None, :] + layout.w[None, :] / 2) - \
        np.maximum(cx[:, None] - cw[:, None] / 2, layout.x[None, :] - layout.w[None, :] / 2)
    oy = np.minimum(cy[:, None] + ch[:, None] / 2, layout.y[None, :] + layout.h[None, :] / 2) - \
        np.maximum(cy[:, None] - ch[:, None] / 2, layout.y[None, :] - layout.h[None, :] / 2)
    out = np.clip(ox, 0.0, None) * np.clip(oy, 0.0, None)
    out[:, i] = 0.0
    return out


# -- pipeline ----------------------------------------------------------------


@dataclass
class PipelineResult:
    tree: ImageTree
    layout: LayoutState
    trace: OptimizationTrace
    initial: InitialLayout


def run_pipeline(
    items: Sequence[ImageItem],
    schema: PropertySchema,
    shape: ShapeRegion,
    params: CostParams | None = None,
    tuning: TuningParams | None = None,
    focus_id: str | None = None,
) -> PipelineResult:
    """Full layout pipeline: order, root selection, tree build (plus focus
    transfer with the balance-triggered rebuild), projection, global per-level
    optimization, and the three local adjustment passes."""
    params = params if params is not None else CostParams()
    tuning = tuning if tuning is not None else TuningParams()
    ordered = order_collection(items, schema)
    root_id = select_root(ordered, schema)
    tree = build_tree(ordered, root_id, schema)
    if focus_id is not None:
        tree = transfer_tree(tree, focus_id)
        if is_unbalanced(tree):
            tree = build_tree(ordered, focus_id, schema)
    initial = project(tree, ordered, shape.bbox)
    trace = OptimizationTrace()
    layout = global_optimize(tree, initial, shape, params, trace)
    move_outside_images(layout, tree, initial.level_radii, shape, params, tuning, trace)
    resolve_overlaps_by_scaling(
        layout, tree, shape, params.max_overlap, tuning.max_scaling_iters, trace
    )
    local_tune(layout, tree, shape, params, tuning, trace)
    return PipelineResult(tree=tree, layout=layout, trace=trace, initial=initial)
