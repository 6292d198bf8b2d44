from __future__ import annotations

import math

import pytest

from treecollage.hyperbolic import level_radii, project
from treecollage.model import Descriptor, ImageItem, PropertySchema, Tag
from treecollage.tree import ImageTree, build_tree

CANVAS = (0.0, 0.0, 400.0, 400.0)


def make_tree(parents: dict[str, str], levels: dict[str, int], order, f=2) -> ImageTree:
    return ImageTree(order[0], parents, levels, tuple(order), f)


def square_item(item_id: str, side=100) -> ImageItem:
    return ImageItem(item_id, side, side, (Tag("x"),))


class TestLevelRadii:
    def test_root_only(self):
        tree = make_tree({"r": "r"}, {"r": 0}, ["r"])
        assert level_radii(tree, {"r": (100.0, 100.0)}) == [0.0]

    def test_single_parent_diagonal(self):
        tree = make_tree({"r": "r", "a": "r"}, {"r": 0, "a": 1}, ["r", "a"])
        sizes = {"r": (100.0, 100.0), "a": (50.0, 50.0)}
        radii = level_radii(tree, sizes)
        assert radii[0] == 0.0
        assert radii[1] == pytest.approx(math.hypot(100, 100), abs=1e-12)

    def test_mean_of_level_diagonals(self):
        tree = make_tree(
            {"r": "r", "a": "r", "b": "r", "c": "a"},
            {"r": 0, "a": 1, "b": 1, "c": 2},
            ["r", "a", "b", "c"],
        )
        sizes = {
            "r": (100.0, 100.0),
            "a": (60.0, 80.0),  # diagonal 100
            "b": (120.0, 160.0),  # diagonal 200
            "c": (10.0, 10.0),
        }
        radii = level_radii(tree, sizes)
        assert radii[2] == pytest.approx(radii[1] + 150.0, abs=1e-12)


class TestProject:
    def test_single_root_centered(self):
        tree = make_tree({"r": "r"}, {"r": 0}, ["r"])
        items = [ImageItem("r", 300, 200, (Tag("x"),))]
        layout = project(tree, items, CANVAS, fill_factor=0.5)
        assert layout.positions["r"] == (200.0, 200.0)
        w, h = layout.sizes["r"]
        disk_area = math.pi * 200.0 * 200.0
        assert w * h == pytest.approx(0.5 * disk_area, rel=1e-9)
        assert w / h == pytest.approx(300 / 200, rel=1e-9)

    def test_two_equal_children_opposite(self):
        tree = make_tree(
            {"r": "r", "a": "r", "b": "r"}, {"r": 0, "a": 1, "b": 1}, ["r", "a", "b"]
        )
        items = [square_item(i) for i in ("r", "a", "b")]
        layout = project(tree, items, CANVAS)
        (ax, ay) = layout.positions["a"]
        (bx, by) = layout.positions["b"]
        # equal subtree sizes split the circle in half: midpoints at 90 and 270 degrees
        assert math.atan2(ay - 200.0, ax - 200.0) == pytest.approx(math.pi / 2, abs=1e-9)
        assert math.atan2(by - 200.0, bx - 200.0) == pytest.approx(-math.pi / 2, abs=1e-9)
        assert layout.sizes["a"] == layout.sizes["b"]
        da = math.hypot(ax - 200.0, ay - 200.0)
        db = math.hypot(bx - 200.0, by - 200.0)
        assert da == pytest.approx(db, rel=1e-12)

    def test_sizes_strictly_shrink_with_depth(self):
        parents = {"r": "r", "a": "r", "b": "a", "c": "b"}
        levels = {"r": 0, "a": 1, "b": 2, "c": 3}
        tree = make_tree(parents, levels, ["r", "a", "b", "c"], f=2)
        items = [square_item(i) for i in parents]
        layout = project(tree, items, CANVAS)
        for node, parent in (("a", "r"), ("b", "a"), ("c", "b")):
            area = layout.sizes[node][0] * layout.sizes[node][1]
            parent_area = layout.sizes[parent][0] * layout.sizes[parent][1]
            assert area < parent_area

    def test_positions_inside_disk(self):
        parents = {"r": "r", "a": "r", "b": "a", "c": "b", "d": "r"}
        levels = {"r": 0, "a": 1, "b": 2, "c": 3, "d": 1}
        tree = make_tree(parents, levels, ["r", "a", "b", "c", "d"], f=2)
        items = [square_item(i) for i in parents]
        layout = project(tree, items, CANVAS)
        for node, (x, y) in layout.positions.items():
            assert math.hypot(x - 200.0, y - 200.0) < 200.0

    def test_branch_interval_nesting(self):
        # everything under one level-1 ancestor stays inside its angular wedge
        parents = {"r": "r", "a": "r", "b": "r", "a1": "a", "a2": "a", "b1": "b", "a11": "a1"}
        levels = {"r": 0, "a": 1, "b": 1, "a1": 2, "a2": 2, "b1": 2, "a11": 3}
        order = ["r", "a", "b", "a1", "a2", "b1", "a11"]
        tree = make_tree(parents, levels, order, f=2)
        items = [square_item(i) for i in order]
        layout = project(tree, items, CANVAS)

        def branch_of(node):
            while parents[node] != "r":
                node = parents[node]
            return node

        # subtree sizes: a -> 4, b -> 2; wedge of a is [0, 4pi/3), b is [4pi/3, 2pi)
        split = 2.0 * math.pi * 4 / 6
        for node in order:
            if node == "r":
                continue
            x, y = layout.positions[node]
            theta = math.atan2(y - 200.0, x - 200.0) % (2.0 * math.pi)
            if branch_of(node) == "a":
                assert 0.0 <= theta < split
            else:
                assert split <= theta < 2.0 * math.pi

    def test_deterministic(self):
        items = []
        for k in range(12):
            items.append(ImageItem(f"i{k}", 100 + k, 120, (Tag("ab"[k % 2]),)))
        schema = PropertySchema((Descriptor("t", "semantic", 0.5),))
        tree = build_tree(items, "i0", schema)
        a = project(tree, items, CANVAS)
        b = project(tree, items, CANVAS)
        assert a == b
