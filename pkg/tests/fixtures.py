"""Bundled synthetic fixture collections for pipeline and acceptance tests.

Everything is generated deterministically from fixed seeds: collections with
a semantic category property plus a clustered color histogram property, and a
mix of rectangular and non-rectangular target shapes.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from treecollage.geometry import ShapeRegion
from treecollage.model import Descriptor, Histogram, ImageItem, PropertySchema, Tag

CATEGORIES = ("electronics", "furniture", "grocery", "sports", "toys", "apparel")
COLOR_BINS = 8

SCHEMA = PropertySchema(
    (
        Descriptor("category", "semantic", 0.5),
        Descriptor("color", "visual", 0.5),
    )
)


def _color_hist(rng: random.Random, mode: int) -> Histogram:
    weights = [0.02 + 0.03 * rng.random() for _ in range(COLOR_BINS)]
    weights[mode] += 1.0 + 0.3 * rng.random()
    return Histogram.normalized(weights)


def make_collection(n: int, seed: int, category_count: int = 4) -> list[ImageItem]:
    """A collection with ``n`` items spread over categories, each category
    using a couple of dominant color modes so color sub-grouping occurs."""
    rng = random.Random(seed)
    cats = CATEGORIES[:category_count]
    modes = {cat: rng.sample(range(COLOR_BINS), 2) for cat in cats}
    items = []
    for i in range(n):
        cat = cats[i % len(cats)] if i < 2 * len(cats) else rng.choice(cats)
        mode = rng.choice(modes[cat])
        width = rng.randint(150, 400)
        height = rng.randint(150, 400)
        items.append(
            ImageItem(
                id=f"img{i:03d}",
                native_width=width,
                native_height=height,
                properties=(Tag(cat), _color_hist(rng, mode)),
            )
        )
    return items


# -- shapes ------------------------------------------------------------------


def circle_mask(resolution: int = 384) -> ShapeRegion:
    r = resolution / 2.0
    yy, xx = np.mgrid[0:resolution, 0:resolution]
    mask = (xx + 0.5 - r) ** 2 + (yy + 0.5 - r) ** 2 <= r * r
    return ShapeRegion(mask, source={"kind": "mask", "name": "circle"})


def ellipse_mask(cols: int = 448, rows: int = 320) -> ShapeRegion:
    yy, xx = np.mgrid[0:rows, 0:cols]
    mask = ((xx + 0.5 - cols / 2) / (cols / 2)) ** 2 + ((yy + 0.5 - rows / 2) / (rows / 2)) ** 2 <= 1.0
    return ShapeRegion(mask, source={"kind": "mask", "name": "ellipse"})


def heart_polygon(scale: float = 400.0) -> ShapeRegion:
    pts = []
    for k in range(64):
        t = 2.0 * math.pi * k / 64
        x = 16 * math.sin(t) ** 3
        y = 13 * math.cos(t) - 5 * math.cos(2 * t) - 2 * math.cos(3 * t) - math.cos(4 * t)
        pts.append((scale / 2 + x * scale / 36, scale / 2 - y * scale / 36))
    return ShapeRegion.from_polygon(pts, resolution=384)


def cross_polygon(size: float = 420.0) -> ShapeRegion:
    a = size / 3.0
    pts = [
        (a, 0), (2 * a, 0), (2 * a, a), (3 * a, a), (3 * a, 2 * a),
        (2 * a, 2 * a), (2 * a, 3 * a), (a, 3 * a), (a, 2 * a), (0, 2 * a),
        (0, a), (a, a),
    ]
    return ShapeRegion.from_polygon(pts, resolution=384)


def diamond_polygon(size: float = 440.0) -> ShapeRegion:
    half = size / 2.0
    pts = [(half, 0), (size, half), (half, size), (0, half)]
    return ShapeRegion.from_polygon(pts, resolution=384)


def rect_shape(width: float = 512.0, height: float = 384.0, resolution: int = 384) -> ShapeRegion:
    return ShapeRegion.rectangle(width, height, resolution=resolution)


# -- bundled fixture set -----------------------------------------------------


@dataclass(frozen=True)
class Fixture:
    name: str
    items: tuple[ImageItem, ...]
    shape_kind: str  # used by manifest round-trips

    def make_shape(self) -> ShapeRegion:
        return SHAPE_BUILDERS[self.shape_kind]()


SHAPE_BUILDERS = {
    "rect": rect_shape,
    "circle": circle_mask,
    "ellipse": ellipse_mask,
    "heart": heart_polygon,
    "cross": cross_polygon,
    "diamond": diamond_polygon,
    "rect512": lambda: rect_shape(512.0, 384.0, resolution=512),
}

_FIXTURE_SPECS = [
    ("rect30", 30, 11, 3, "rect"),
    ("circle35", 35, 12, 4, "circle"),
    ("walmart40", 40, 13, 5, "rect"),
    ("heart45", 45, 14, 4, "heart"),
    ("cross50", 50, 15, 4, "cross"),
    ("rect55", 55, 16, 5, "rect"),
    ("circle60", 60, 17, 5, "circle"),
    ("diamond65", 65, 18, 4, "diamond"),
    ("rect70", 70, 19, 5, "rect"),
    ("ellipse80", 80, 20, 5, "ellipse"),
    ("rect90", 90, 21, 6, "rect"),
    ("rect100", 100, 22, 6, "rect512"),
]


def fixture_set() -> list[Fixture]:
    return [
        Fixture(name=name, items=tuple(make_collection(n, seed, cats)), shape_kind=kind)
        for name, n, seed, cats, kind in _FIXTURE_SPECS
    ]


def manifest_dict(items, shape_polygon=None, mask_path=None, params=None, tuning=None) -> dict:
    """Manifest JSON structure for a list of items (for IO/service tests)."""
    doc: dict = {
        "version": 1,
        "schema": [
            {"name": "category", "kind": "semantic", "threshold": 0.5},
            {"name": "color", "kind": "visual", "threshold": 0.5},
        ],
        "items": [
            {
                "id": item.id,
                "width": item.native_width,
                "height": item.native_height,
                "properties": {
                    "category": item.properties[0].value,
                    "color": list(item.properties[1].bins),
                },
            }
            for item in items
        ],
    }
    if shape_polygon is not None:
        doc["shape"] = {"polygon": [[x, y] for x, y in shape_polygon]}
    else:
        doc["shape"] = {"mask": mask_path}
    if params:
        doc["params"] = params
    if tuning:
        doc["tuning"] = tuning
    return doc
