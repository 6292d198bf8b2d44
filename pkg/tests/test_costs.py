from __future__ import annotations

import math
import random

import numpy as np
import pytest

from treecollage.costs import (
    CostParams,
    LayoutState,
    correlation_cost,
    correlation_cost_grad,
    level_cost,
    level_cost_grad,
    level_objective,
    overlap_cost,
    overlap_ratios_all,
    shape_cost,
    size_cost,
    size_cost_grad,
)
from treecollage.geometry import ShapeRegion
from treecollage.tree import ImageTree


def make_layout(entries, lower=0.8, upper=1.2) -> LayoutState:
    """entries: list of (id, x, y, w, h); bounds scale off the given sizes."""
    ids = [e[0] for e in entries]
    x = np.array([e[1] for e in entries], float)
    y = np.array([e[2] for e in entries], float)
    w = np.array([e[3] for e in entries], float)
    h = np.array([e[4] for e in entries], float)
    return LayoutState(ids, x, y, w, h, lower * w, upper * w, lower * h, upper * h)


def make_tree(parents, levels, order, f=2):
    return ImageTree(order[0], parents, levels, tuple(order), f)


def star(n: int):
    order = ["r"] + [f"c{i}" for i in range(n)]
    parents = {"r": "r", **{f"c{i}": "r" for i in range(n)}}
    levels = {"r": 0, **{f"c{i}": 1 for i in range(n)}}
    return make_tree(parents, levels, order)


BIG_RECT = ShapeRegion(np.ones((500, 500), dtype=bool))


class TestCorrelationCost:
    def test_children_at_parent_centers(self):
        tree = star(2)
        layout = make_layout([("r", 0, 0, 100, 100), ("c0", 0, 0, 50, 50), ("c1", 0, 0, 50, 50)])
        assert correlation_cost(layout, tree) == 0.0

    def test_one_diagonal_costs_half(self):
        tree = star(1)
        diag = math.hypot(100, 100)
        layout = make_layout([("r", 0, 0, 100, 100), ("c0", diag, 0, 50, 50)])
        assert correlation_cost(layout, tree) == pytest.approx(0.5, abs=1e-9)

    def test_two_diagonals(self):
        tree = star(1)
        diag = math.hypot(100, 100)
        layout = make_layout([("r", 0, 0, 100, 100), ("c0", 2 * diag, 0, 50, 50)])
        assert correlation_cost(layout, tree) == pytest.approx(0.75, abs=1e-9)

    def test_restricted_selection(self):
        tree = star(2)
        diag = math.hypot(100, 100)
        layout = make_layout([("r", 0, 0, 100, 100), ("c0", diag, 0, 50, 50), ("c1", 0, 0, 50, 50)])
        assert correlation_cost(layout, tree, ids=["c1"]) == 0.0
        assert correlation_cost(layout, tree, ids=["c0"]) == pytest.approx(0.5, abs=1e-9)


class TestLevelCost:
    def test_on_ring_is_zero(self):
        tree = star(2)
        layout = make_layout([("r", 0, 0, 100, 100), ("c0", 80, 0, 50, 50), ("c1", 0, 80, 50, 50)])
        assert level_cost(layout, tree, [0.0, 80.0]) == 0.0

    def test_displaced_by_own_diagonal(self):
        tree = star(1)
        own_diag = math.hypot(30, 40)
        layout = make_layout([("r", 0, 0, 100, 100), ("c0", 80 + own_diag, 0, 30, 40)])
        assert level_cost(layout, tree, [0.0, 80.0]) == pytest.approx(0.5, abs=1e-9)

    def test_root_only_is_zero(self):
        tree = make_tree({"r": "r"}, {"r": 0}, ["r"])
        layout = make_layout([("r", 0, 0, 100, 100)])
        assert level_cost(layout, tree, [0.0]) == 0.0


class TestSizeCost:
    def test_upper_bound_zero(self):
        layout = make_layout([("a", 0, 0, 120, 120)], lower=0.8 * 100 / 120, upper=1.0)
        assert size_cost(layout) == 0.0

    def test_lower_bound_one(self):
        layout = make_layout([("a", 0, 0, 80, 80)], lower=1.0, upper=1.2 * 100 / 80)
        assert size_cost(layout) == pytest.approx(1.0, abs=1e-12)

    def test_halfway_area(self):
        w = np.array([100.0])
        lo_w, hi_w = np.array([80.0]), np.array([120.0])
        mid_area = (80.0 * 80.0 + 120.0 * 120.0) / 2.0
        side = math.sqrt(mid_area)
        layout = LayoutState(["a"], np.zeros(1), np.zeros(1), np.array([side]), np.array([side]),
                             lo_w, hi_w, lo_w, hi_w)
        assert size_cost(layout) == pytest.approx(0.5, abs=1e-12)

    def test_degenerate_bounds_error(self):
        layout = LayoutState(["a"], np.zeros(1), np.zeros(1), np.array([5.0]), np.array([5.0]),
                             np.array([5.0]), np.array([5.0]), np.array([5.0]), np.array([5.0]))
        with pytest.raises(ValueError, match="bounds"):
            size_cost(layout)


class TestOverlapCost:
    def test_disjoint(self):
        tree = star(2)
        layout = make_layout([("r", 0, 0, 10, 10), ("c0", 100, 0, 10, 10), ("c1", 0, 100, 10, 10)])
        assert overlap_cost(layout, tree, 1) == 0.0

    def test_fully_covered(self):
        tree = star(1)
        layout = make_layout([("r", 0, 0, 50, 50), ("c0", 0, 0, 10, 10)])
        assert overlap_cost(layout, tree, 1) >= 1.0

    def test_threshold_subtracted(self):
        tree = star(1)
        # overlap area 30 against own area 100: ratio 0.3
        layout = make_layout([("r", 0.0, 0.0, 10.0, 10.0), ("c0", 7.0, 0.0, 10.0, 10.0)])
        assert overlap_cost(layout, tree, 1, max_overlap=0.2) == pytest.approx(0.1, abs=1e-12)
        assert overlap_cost(layout, tree, 1, max_overlap=0.5) == 0.0


class TestShapeCost:
    def test_inside_centers_zero(self):
        tree = star(1)
        layout = make_layout([("r", 100, 100, 20, 20), ("c0", 200, 200, 20, 20)])
        assert shape_cost(layout, BIG_RECT, ["c0"]) == 0.0

    def test_outside_at_own_diagonal_costs_half(self):
        tree = star(1)
        probe = (-40.0, 100.0)
        _, d = BIG_RECT.nearest_inside(probe)
        # size the image so its diagonal equals the measured gap
        w = d / math.hypot(1, 1)
        layout = make_layout([("r", 100, 100, 20, 20), ("c0", probe[0], probe[1], w, w)])
        assert shape_cost(layout, BIG_RECT, ["c0"]) == pytest.approx(0.5, abs=1e-9)

    def test_cost_vanishes_at_boundary(self):
        tree = star(1)
        values = []
        for x in (-8.0, -4.0, -1.0, -0.2):
            layout = make_layout([("r", 100, 100, 20, 20), ("c0", x, 100, 30, 30)])
            values.append(shape_cost(layout, BIG_RECT, ["c0"]))
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[-1] < 0.02


class TestObjective:
    def test_perfect_layout_zero(self):
        tree = star(1)
        layout = make_layout([("r", 100, 100, 100, 100), ("c0", 100 + 80, 100, 50, 50)],
                             lower=0.8, upper=1.0)
        params = CostParams()
        # child centered on its ring, at its upper size bound, inside, disjoint
        layout.x[1] = 100 + 80
        obj = level_objective(layout, tree, [0.0, 80.0], BIG_RECT, params, 1)
        # correlation is the only nonzero term here; cancel it by weight
        params_no_corr = CostParams(w_corr=0.0)
        assert level_objective(layout, tree, [0.0, 80.0], BIG_RECT, params_no_corr, 1) == 0.0
        assert obj > 0.0

    def test_weighted_sum_decomposition(self):
        tree = star(2)
        layout = make_layout(
            [("r", 100, 100, 60, 60), ("c0", 130, 100, 40, 40), ("c1", 100, 160, 40, 40)]
        )
        params = CostParams()
        radii = [0.0, 70.0]
        ids = ["c0", "c1"]
        expected = (
            params.w_corr * correlation_cost(layout, tree, ids)
            + params.w_level * level_cost(layout, tree, radii, ids)
            + params.w_size * size_cost(layout, ids)
            + params.w_overlap * overlap_cost(layout, tree, 1, params.max_overlap)
            + params.w_shape * shape_cost(layout, BIG_RECT, ids)
        )
        got = level_objective(layout, tree, radii, BIG_RECT, params, 1)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_overlap_excess_weighs_hundredfold(self):
        tree = star(1)
        # ratio 0.02 against the root, other costs cancelled via weights
        layout = make_layout([("r", 0.0, 0.0, 10.0, 10.0), ("c0", 9.8, 0.0, 10.0, 10.0)])
        params = CostParams(w_corr=0.0, w_level=0.0, w_size=0.0, w_shape=0.0)
        ratio = overlap_cost(layout, tree, 1, 0.0)
        assert ratio == pytest.approx(0.02, abs=1e-12)
        obj = level_objective(layout, tree, [0.0, 1.0], BIG_RECT, params, 1)
        assert obj == pytest.approx(2.0, abs=1e-12)

    def test_scaling_weights_scales_objective(self):
        tree = star(2)
        layout = make_layout(
            [("r", 100, 100, 60, 60), ("c0", 135, 100, 40, 40), ("c1", 100, 160, 40, 40)]
        )
        radii = [0.0, 70.0]
        base = CostParams()
        doubled = CostParams(
            w_corr=2.0, w_level=2.0, w_size=2.0 / 3.0, w_overlap=200.0, w_shape=200.0
        )
        a = level_objective(layout, tree, radii, BIG_RECT, base, 1)
        b = level_objective(layout, tree, radii, BIG_RECT, doubled, 1)
        assert b == pytest.approx(2.0 * a, rel=1e-12)

    def test_default_weight_ratios(self):
        p = CostParams()
        assert p.w_corr == p.w_level
        assert p.w_corr == pytest.approx(3.0 * p.w_size)
        assert p.w_corr == pytest.approx(0.01 * p.w_overlap)
        assert p.w_corr == pytest.approx(0.01 * p.w_shape)
        assert p.max_overlap == 0.0
        assert p.curvature == 0.5


class TestGradients:
    def _random_case(self, seed):
        rng = random.Random(seed)
        entries = [("r", 100.0, 100.0, 60.0, 50.0)]
        parents = {"r": "r"}
        levels = {"r": 0}
        order = ["r"]
        for i in range(4):
            entries.append(
                (f"c{i}", 100 + rng.uniform(-80, 80), 100 + rng.uniform(-80, 80),
                 rng.uniform(20, 50), rng.uniform(20, 50))
            )
            parents[f"c{i}"] = "r"
            levels[f"c{i}"] = 1
            order.append(f"c{i}")
        tree = make_tree(parents, levels, order)
        return make_layout(entries), tree, ["c0", "c1", "c2", "c3"]

    def _check_fd(self, layout, ids, analytic, func, rel=1e-4):
        eps = 1e-6
        for k, node in enumerate(ids):
            i = layout.index[node]
            for f_idx, arr in enumerate((layout.x, layout.y, layout.w, layout.h)):
                orig = arr[i]
                arr[i] = orig + eps
                up = func()
                arr[i] = orig - eps
                down = func()
                arr[i] = orig
                fd = (up - down) / (2 * eps)
                if abs(fd) < 1e-12 and abs(analytic[k, f_idx]) < 1e-12:
                    continue
                assert analytic[k, f_idx] == pytest.approx(fd, rel=rel, abs=1e-10), (
                    f"{node} component {f_idx}"
                )

    def test_correlation_grad(self):
        layout, tree, ids = self._random_case(1)
        grad = correlation_cost_grad(layout, tree, ids)
        self._check_fd(layout, ids, grad, lambda: correlation_cost(layout, tree, ids))

    def test_level_grad(self):
        layout, tree, ids = self._random_case(2)
        radii = [0.0, 75.0]
        grad = level_cost_grad(layout, tree, radii, ids)
        self._check_fd(layout, ids, grad, lambda: level_cost(layout, tree, radii, ids))

    def test_size_grad(self):
        layout, tree, ids = self._random_case(3)
        grad = size_cost_grad(layout, ids)
        self._check_fd(layout, ids, grad, lambda: size_cost(layout, ids))


class TestContinuity:
    def test_position_costs_are_continuous(self):
        tree = star(3)
        layout = make_layout(
            [("r", 100, 100, 60, 60), ("c0", 140, 100, 40, 40),
             ("c1", 100, 150, 40, 40), ("c2", 60, 100, 40, 40)]
        )
        radii = [0.0, 70.0]
        rng = random.Random(11)
        base = (
            correlation_cost(layout, tree),
            level_cost(layout, tree, radii),
            shape_cost(layout, BIG_RECT, list(layout.ids)),
        )
        eps = 1e-6
        for _ in range(30):
            i = rng.randrange(1, 4)
            arr = layout.x if rng.random() < 0.5 else layout.y
            arr[i] += eps
            moved = (
                correlation_cost(layout, tree),
                level_cost(layout, tree, radii),
                shape_cost(layout, BIG_RECT, list(layout.ids)),
            )
            arr[i] -= eps
            for a, b in zip(base, moved):
                assert abs(a - b) < 1e-3  # generous Lipschitz bound for a 1e-6 step

    def test_overlap_ratios_all(self):
        layout = make_layout([("a", 0.0, 0.0, 2.0, 2.0), ("b", 1.0, 0.0, 2.0, 2.0)])
        ratios = overlap_ratios_all(layout)
        assert ratios[0] == pytest.approx(0.5)
        assert ratios[1] == pytest.approx(0.5)
