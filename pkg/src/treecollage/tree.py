"""Property-based tree construction, focus transfer, and the balance detector.

A collection is arranged into a 1-D array, one image is chosen as the root,
and the remaining images are inserted sequentially: at each level the image
either starts a new branch (no similar sibling) or descends under its most
similar sibling to be grouped by the next property.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import (
    SEMANTIC,
    Histogram,
    ImageItem,
    PropertySchema,
    Tag,
    check_item_schema,
    dissimilarity,
)

# Balance detector defaults: a transferred tree is rebuilt when one branch
# holds more than this fraction of the non-root nodes, or when the depth
# exceeds property_count + DEPTH_MARGIN.
MAX_BRANCH_FRACTION = 0.8
DEPTH_MARGIN = 2


@dataclass
class ImageTree:
    """Parent/level structure over a collection.

    ``order`` lists every node exactly once, root first, in insertion order;
    parents always precede their children. The root is its own parent at
    level 0. ``property_count`` is the schema size that governed construction,
    so the maximum build depth is ``property_count + 1``.
    """

    root_id: str
    parents: dict[str, str]
    levels: dict[str, int]
    order: tuple[str, ...]
    property_count: int
    _children: dict[str, list[str]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        children: dict[str, list[str]] = {node: [] for node in self.order}
        for node in self.order:
            parent = self.parents[node]
            if node != self.root_id:
                children[parent].append(node)
        self._children = children

    def __len__(self) -> int:
        return len(self.order)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.parents

    @property
    def max_build_level(self) -> int:
        return self.property_count + 1

    def children(self, node_id: str) -> tuple[str, ...]:
        return tuple(self._children[node_id])

    def level_nodes(self, level: int) -> tuple[str, ...]:
        return tuple(n for n in self.order if self.levels[n] == level)

    @property
    def depth(self) -> int:
        return max(self.levels.values())

    def subtree_size(self, node_id: str) -> int:
        size = 1
        for child in self._children[node_id]:
            size += self.subtree_size(child)
        return size

    def branch_root(self, node_id: str) -> str | None:
        """The level-1 ancestor of a node, or None for the root itself."""
        if node_id == self.root_id:
            return None
        node = node_id
        while self.parents[node] != self.root_id:
            node = self.parents[node]
        return node

    def validate(self) -> None:
        """Check the structural invariants; raise ValueError on violation."""
        if len(set(self.order)) != len(self.order):
            raise ValueError("duplicate node in tree order")
        if set(self.order) != set(self.parents):
            raise ValueError("order and parent map disagree on node set")
        if self.order[0] != self.root_id:
            raise ValueError("root must come first in tree order")
        if self.parents[self.root_id] != self.root_id or self.levels[self.root_id] != 0:
            raise ValueError("root must be its own parent at level 0")
        for node in self.order:
            parent = self.parents[node]
            if node == self.root_id:
                continue
            if parent == node:
                raise ValueError(f"non-root node {node!r} is its own parent")
            if parent not in self.parents:
                raise ValueError(f"node {node!r} has unknown parent {parent!r}")
            if self.levels[node] != self.levels[parent] + 1:
                raise ValueError(f"node {node!r} level is not parent level + 1")
        # Connectivity: every node must reach the root through parents.
        for node in self.order:
            seen = set()
            cur = node
            while cur != self.root_id:
                if cur in seen:
                    raise ValueError(f"cycle through {cur!r}")
                seen.add(cur)
                cur = self.parents[cur]


def _mean_histograms(items: Sequence[ImageItem], schema: PropertySchema) -> dict[int, np.ndarray]:
    """Mean histogram per visual descriptor index, over the whole collection."""
    means: dict[int, np.ndarray] = {}
    for f, desc in enumerate(schema.descriptors):
        if desc.kind == SEMANTIC:
            continue
        stacks = []
        for item in items:
            value = item.properties[f]
            if not isinstance(value, Histogram):
                raise TypeError(f"item {item.id!r} property {desc.name!r} must be a histogram")
            stacks.append(value.bins)
        arr = np.asarray(stacks, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"property {desc.name!r}: histogram bin counts differ across items")
        means[f] = arr.mean(axis=0)
    return means


def order_collection(items: Sequence[ImageItem], schema: PropertySchema) -> list[ImageItem]:
    """Deterministic 1-D arrangement of the collection.

    Stable sort: semantic properties compare lexicographically by tag in
    schema order; visual properties break remaining ties by descending
    similarity to the collection's mean histogram; ids break final ties.
    """
    if not items:
        raise ValueError("cannot order an empty collection")
    for item in items:
        check_item_schema(item, schema)
    means = _mean_histograms(items, schema)

    def key(item: ImageItem):
        parts: list = []
        for f, desc in enumerate(schema.descriptors):
            value = item.properties[f]
            if desc.kind == SEMANTIC:
                assert isinstance(value, Tag)
                parts.append(value.value)
            else:
                assert isinstance(value, Histogram)
                sim = float(np.minimum(np.asarray(value.bins), means[f]).sum())
                parts.append(-sim)
        parts.append(item.id)
        return tuple(parts)

    return sorted(items, key=key)


def select_root(items: Sequence[ImageItem], schema: PropertySchema) -> str:
    """Pick the image sharing the least common first property with the rest.

    Semantic first property: the rarest tag wins. Visual first property: the
    image with the largest mean dissimilarity to all others wins. Ties go to
    the lowest id.
    """
    if not items:
        raise ValueError("cannot select a root from an empty collection")
    if len(items) == 1:
        return items[0].id
    desc = schema.descriptors[0]
    if desc.kind == SEMANTIC:
        counts = Counter(item.properties[0].value for item in items)  # type: ignore[union-attr]
        return min(items, key=lambda it: (counts[it.properties[0].value], it.id)).id
    hists = np.asarray([it.properties[0].bins for it in items], dtype=np.float64)
    # pairwise intersection similarity, mean dissimilarity to the others
    sims = np.minimum(hists[:, None, :], hists[None, :, :]).sum(axis=2)
    np.fill_diagonal(sims, 0.0)
    mean_diss = (len(items) - 1 - sims.sum(axis=1)) / (len(items) - 1)
    best = min(range(len(items)), key=lambda i: (-mean_diss[i], items[i].id))
    return items[best].id


def build_tree(items: Sequence[ImageItem], root_id: str, schema: PropertySchema) -> ImageTree:
    """Insert the ordered collection into a property tree.

    Each non-root image starts at level 1 under the root. At level j it is
    compared, on property j, against the current parent's children: if none
    falls below the level's threshold the image is placed there to start a
    new branch; otherwise it descends under the most similar child (earliest
    inserted on ties) and the next property is compared, one level deeper.
    After matching on every property it lands at level property_count + 1.
    """
    by_id = {item.id: item for item in items}
    if len(by_id) != len(items):
        raise ValueError("duplicate item ids")
    if root_id not in by_id:
        raise ValueError(f"root id {root_id!r} not in collection")
    for item in items:
        check_item_schema(item, schema)

    f_count = schema.property_count
    parents: dict[str, str] = {root_id: root_id}
    levels: dict[str, int] = {root_id: 0}
    order: list[str] = [root_id]
    children: dict[str, list[str]] = {root_id: []}

    for item in items:
        if item.id == root_id:
            continue
        parent = root_id
        level = 1
        while True:
            threshold = schema.descriptor_for_level(level).threshold
            best_id: str | None = None
            best_d = float("inf")
            for sibling_id in children[parent]:
                d = dissimilarity(
                    schema, level, item.properties[level - 1], by_id[sibling_id].properties[level - 1]
                )
                if d < threshold and d < best_d:
                    best_id = sibling_id
                    best_d = d
            if best_id is None:
                break
            parent = best_id
            level += 1
            if level > f_count:
                # matched on every property: place under the deepest match
                break
        parents[item.id] = parent
        levels[item.id] = level
        order.append(item.id)
        children[item.id] = []
        children[parent].append(item.id)

    return ImageTree(
        root_id=root_id,
        parents=parents,
        levels=levels,
        order=tuple(order),
        property_count=f_count,
    )


def transfer_tree(tree: ImageTree, focus_id: str) -> ImageTree:
    """Re-root the tree at a focus image.

    The focus's former parent and its immediately adjacent siblings (previous
    and next in insertion order under the shared parent) become children of
    the focus; every other edge is kept, re-oriented away from the new root.
    Levels are recomputed as depth from the focus.
    """
    if focus_id not in tree:
        raise KeyError(f"unknown image id {focus_id!r}")
    if focus_id == tree.root_id:
        return tree

    # Path from the focus up to the old root; edges along it flip direction.
    path = [focus_id]
    while path[-1] != tree.root_id:
        path.append(tree.parents[path[-1]])

    old_parent = path[1]
    siblings = list(tree.children(old_parent))
    at = siblings.index(focus_id)
    prev_sib = siblings[at - 1] if at > 0 else None
    next_sib = siblings[at + 1] if at + 1 < len(siblings) else None
    moved = {s for s in (prev_sib, next_sib) if s is not None}

    new_children: dict[str, list[str]] = {n: list(tree.children(n)) for n in tree.order}
    new_children[focus_id] = list(tree.children(focus_id)) + [
        s for s in (prev_sib, old_parent, next_sib) if s is not None
    ]
    for k in range(1, len(path)):
        node = path[k]
        kept = [c for c in tree.children(node) if c != path[k - 1]]
        if k == 1:
            kept = [c for c in kept if c not in moved]
        if k + 1 < len(path):
            kept.append(path[k + 1])
        new_children[node] = kept

    parents: dict[str, str] = {focus_id: focus_id}
    levels: dict[str, int] = {focus_id: 0}
    order: list[str] = [focus_id]
    queue = [focus_id]
    while queue:
        node = queue.pop(0)
        for child in new_children[node]:
            parents[child] = node
            levels[child] = levels[node] + 1
            order.append(child)
            queue.append(child)
    if len(order) != len(tree):
        raise AssertionError("transfer lost nodes; tree was not connected")

    return ImageTree(
        root_id=focus_id,
        parents=parents,
        levels=levels,
        order=tuple(order),
        property_count=tree.property_count,
    )


def is_unbalanced(
    tree: ImageTree,
    max_branch_fraction: float = MAX_BRANCH_FRACTION,
    depth_margin: int = DEPTH_MARGIN,
) -> bool:
    """Detect a tree too lopsided to lay out well.

    True when one root branch holds more than ``max_branch_fraction`` of the
    non-root nodes (with at least two branches present), or when the depth
    exceeds ``property_count + depth_margin``.
    """
    if len(tree) < 3:
        return False
    if tree.depth > tree.property_count + depth_margin:
        return True
    branches = tree.children(tree.root_id)
    if len(branches) < 2:
        return False
    non_root = len(tree) - 1
    largest = max(tree.subtree_size(b) for b in branches)
    return largest > max_branch_fraction * non_root
