"""Initial layout: radial disk projection of an image tree.

The tree is embedded in the unit disk: each node's angular interval is split
among its children proportionally to subtree size, a level-j node sits at the
midpoint of its interval at radius tanh(c * j), and apparent image area decays
with (1 - r^2)^2 so deeper images start strictly smaller than their ancestors.
Disk coordinates scale to the inscribed circle of the canvas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import ImageItem
from .tree import ImageTree

RADIAL_CURVE = 0.45
FILL_FACTOR = 0.5


@dataclass(frozen=True)
class InitialLayout:
    """Projected positions, initial sizes, and per-level target radii."""

    positions: dict[str, tuple[float, float]]
    sizes: dict[str, tuple[float, float]]
    level_radii: tuple[float, ...]

    def diagonal(self, node_id: str) -> float:
        w, h = self.sizes[node_id]
        return math.hypot(w, h)


def level_radii(tree: ImageTree, sizes: Mapping[str, tuple[float, float]]) -> list[float]:
    """Target root distance per level: each level adds the mean diagonal of
    the level above it; the root level is at radius 0."""
    radii = [0.0]
    for level in range(1, tree.depth + 1):
        above = tree.level_nodes(level - 1)
        diags = [math.hypot(*sizes[n]) for n in above]
        radii.append(radii[-1] + sum(diags) / len(diags))
    return radii


def project(
    tree: ImageTree,
    items: Sequence[ImageItem],
    canvas: tuple[float, float, float, float],
    radial_curve: float = RADIAL_CURVE,
    fill_factor: float = FILL_FACTOR,
) -> InitialLayout:
    """Deterministic disk projection of the tree into the canvas box."""
    by_id = {item.id: item for item in items}
    x0, y0, x1, y1 = canvas
    if x1 <= x0 or y1 <= y0:
        raise ValueError("canvas must have positive extent")
    cx = (x0 + x1) / 2.0
    cy = (y0 + y1) / 2.0
    disk_r = min(x1 - x0, y1 - y0) / 2.0

    # Angular intervals: the root owns the full circle; children split their
    # parent's interval proportionally to subtree size, in insertion order.
    intervals: dict[str, tuple[float, float]] = {tree.root_id: (0.0, 2.0 * math.pi)}
    for node in tree.order:
        lo, hi = intervals[node]
        kids = tree.children(node)
        if not kids:
            continue
        weights = [tree.subtree_size(k) for k in kids]
        total = sum(weights)
        start = lo
        for kid, weight in zip(kids, weights):
            width = (hi - lo) * weight / total
            intervals[kid] = (start, start + width)
            start += width

    # Area scale: total image area fills fill_factor of the disk.
    decay = {}
    for node in tree.order:
        r = math.tanh(radial_curve * tree.levels[node])
        decay[node] = (1.0 - r * r) ** 2
    base_area = fill_factor * math.pi * disk_r * disk_r / sum(decay.values())

    positions: dict[str, tuple[float, float]] = {}
    sizes: dict[str, tuple[float, float]] = {}
    for node in tree.order:
        level = tree.levels[node]
        r = math.tanh(radial_curve * level)
        lo, hi = intervals[node]
        theta = (lo + hi) / 2.0
        positions[node] = (cx + disk_r * r * math.cos(theta), cy + disk_r * r * math.sin(theta))
        area = base_area * decay[node]
        aspect = by_id[node].aspect
        w = math.sqrt(area * aspect)
        h = math.sqrt(area / aspect)
        sizes[node] = (w, h)
    positions[tree.root_id] = (cx, cy)

    radii = level_radii(tree, sizes)
    return InitialLayout(positions=positions, sizes=sizes, level_radii=tuple(radii))
