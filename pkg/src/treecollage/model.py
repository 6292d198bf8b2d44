"""Core data types for image collections: property schemas, property values,
and the similarity measures that drive tree construction.

All types here are immutable after construction and every operation is a pure
function, so they are safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

# Histograms must be normalized to this tolerance after construction.
HISTOGRAM_SUM_TOL = 1e-9

# Uniform RGB quantization used by extract_color_histogram: 4 levels per
# channel, 64 bins total.
COLOR_LEVELS = 4
COLOR_BIN_COUNT = COLOR_LEVELS ** 3

VISUAL = "visual"
SEMANTIC = "semantic"


@dataclass(frozen=True)
class Histogram:
    """Normalized non-negative bin weights for a visual property."""

    bins: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.bins) == 0:
            raise ValueError("histogram must have at least one bin")
        if any(b < 0.0 for b in self.bins):
            raise ValueError("histogram bins must be non-negative")
        total = math.fsum(self.bins)
        if abs(total - 1.0) > HISTOGRAM_SUM_TOL:
            raise ValueError(f"histogram bins must sum to 1, got {total!r}")

    @classmethod
    def normalized(cls, values) -> "Histogram":
        """Build a histogram from raw non-negative weights, rescaling to sum 1."""
        vals = [float(v) for v in values]
        total = math.fsum(vals)
        if total <= 0.0:
            raise ValueError("cannot normalize histogram with non-positive mass")
        return cls(tuple(v / total for v in vals))

    def __len__(self) -> int:
        return len(self.bins)


@dataclass(frozen=True)
class Tag:
    """Opaque label for a semantic property."""

    value: str


PropertyValue = Union[Histogram, Tag]


@dataclass(frozen=True)
class Descriptor:
    """One property slot in a schema: a name, a kind, and a match threshold."""

    name: str
    kind: str  # VISUAL | SEMANTIC
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in (VISUAL, SEMANTIC):
            raise ValueError(f"descriptor kind must be visual or semantic, got {self.kind!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"descriptor threshold must be in [0, 1], got {self.threshold}")


@dataclass(frozen=True)
class PropertySchema:
    """Ordered list of property descriptors.

    The order is meaningful: the first descriptor governs the first grouping
    level of the tree, the second descriptor the next level, and so on.
    """

    descriptors: tuple[Descriptor, ...]

    def __post_init__(self) -> None:
        if len(self.descriptors) == 0:
            raise ValueError("schema needs at least one descriptor")
        names = [d.name for d in self.descriptors]
        if len(set(names)) != len(names):
            raise ValueError(f"descriptor names must be unique, got {names}")

    @property
    def property_count(self) -> int:
        return len(self.descriptors)

    def descriptor_for_level(self, level: int) -> Descriptor:
        """Descriptor compared at tree level ``level`` (1-based)."""
        if not 1 <= level <= self.property_count:
            raise IndexError(f"level {level} outside 1..{self.property_count}")
        return self.descriptors[level - 1]


@dataclass(frozen=True)
class ImageItem:
    """An image in the collection plus its ordered property values."""

    id: str
    native_width: int
    native_height: int
    properties: tuple[PropertyValue, ...]
    pixel_source: str | None = None

    def __post_init__(self) -> None:
        if self.native_width <= 0 or self.native_height <= 0:
            raise ValueError(f"item {self.id!r}: native size must be positive")

    @property
    def aspect(self) -> float:
        return self.native_width / self.native_height


def check_item_schema(item: ImageItem, schema: PropertySchema) -> None:
    """Raise if the item's property values do not match the schema."""
    if len(item.properties) != schema.property_count:
        raise ValueError(
            f"item {item.id!r} has {len(item.properties)} properties, "
            f"schema expects {schema.property_count}"
        )
    for desc, value in zip(schema.descriptors, item.properties):
        if desc.kind == VISUAL and not isinstance(value, Histogram):
            raise TypeError(f"item {item.id!r} property {desc.name!r} must be a histogram")
        if desc.kind == SEMANTIC and not isinstance(value, Tag):
            raise TypeError(f"item {item.id!r} property {desc.name!r} must be a tag")


def histogram_intersection(a: Histogram, b: Histogram) -> float:
    """Histogram intersection similarity: sum of per-bin minima, in [0, 1]."""
    if len(a.bins) != len(b.bins):
        raise ValueError(f"histogram bin counts differ: {len(a.bins)} vs {len(b.bins)}")
    return math.fsum(min(x, y) for x, y in zip(a.bins, b.bins))


def dissimilarity(schema: PropertySchema, level: int, a: PropertyValue, b: PropertyValue) -> float:
    """Dissimilarity of two property values under the descriptor for ``level``.

    Visual values compare as 1 minus histogram intersection; semantic values
    compare as 0 when the tags are equal and 1 otherwise.
    """
    desc = schema.descriptor_for_level(level)
    if desc.kind == VISUAL:
        if not (isinstance(a, Histogram) and isinstance(b, Histogram)):
            raise TypeError(f"property {desc.name!r} is visual, expected histograms")
        return 1.0 - histogram_intersection(a, b)
    if not (isinstance(a, Tag) and isinstance(b, Tag)):
        raise TypeError(f"property {desc.name!r} is semantic, expected tags")
    return 0.0 if a.value == b.value else 1.0


def extract_color_histogram(pixels) -> Histogram:
    """64-bin color histogram of an 8-bit RGB raster (4x4x4 uniform bins).

    The bin for a pixel is ``16*(r//64) + 4*(g//64) + (b//64)``; counts are
    normalized by the pixel total. Invariant under pixel reordering.
    """
    arr = np.asarray(pixels)
    if arr.size == 0:
        raise ValueError("cannot build a histogram from an empty raster")
    if arr.ndim < 1 or arr.shape[-1] != 3:
        raise ValueError(f"expected RGB raster with trailing dimension 3, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"expected 8-bit raster, got dtype {arr.dtype}")
    flat = arr.reshape(-1, 3)
    step = 256 // COLOR_LEVELS
    idx = (
        (flat[:, 0] // step).astype(np.int64) * COLOR_LEVELS * COLOR_LEVELS
        + (flat[:, 1] // step).astype(np.int64) * COLOR_LEVELS
        + (flat[:, 2] // step).astype(np.int64)
    )
    counts = np.bincount(idx, minlength=COLOR_BIN_COUNT).astype(np.float64)
    return Histogram.normalized(counts)
