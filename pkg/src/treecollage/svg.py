"""SVG rendering of a layout document over its shape outline."""
from __future__ import annotations

import numpy as np
from skimage import measure

from .document import LayoutDocument
from .geometry import ShapeRegion

GOLDEN_ANGLE = 137.50776405003785
ROOT_FILL = "hsl(0, 0%, 55%)"


def _branch_colors(doc: LayoutDocument) -> dict[str, str]:
    """Deterministic fill per item, colored by its level-1 branch."""
    by_id = {item.id: item for item in doc.items}
    branch_hue: dict[str, float] = {}
    colors: dict[str, str] = {}
    for item in doc.items:
        node = item
        while node.parent != node.id and by_id[node.parent].parent != node.parent:
            node = by_id[node.parent]
        if node.parent == node.id:
            colors[item.id] = ROOT_FILL  # the root itself
            continue
        branch = node.id
        if branch not in branch_hue:
            branch_hue[branch] = (len(branch_hue) * GOLDEN_ANGLE) % 360.0
        colors[item.id] = f"hsl({branch_hue[branch]:.1f}, 65%, 62%)"
    return colors


def _outline_paths(shape: ShapeRegion) -> list[str]:
    """Shape outline as SVG path data, in layout coordinates."""
    source = shape.source
    if source.get("kind") == "polygon":
        pts = source["points"]
        coords = " L ".join(f"{x:.3f} {y:.3f}" for x, y in pts)
        return [f"M {coords} Z"]
    # pad so regions touching the grid edge still produce closed contours
    padded = np.pad(shape.mask, 1, constant_values=False).astype(float)
    paths = []
    for contour in measure.find_contours(padded, 0.5):
        xs = shape.origin[0] + (contour[:, 1] - 0.5) * shape.cell
        ys = shape.origin[1] + (contour[:, 0] - 0.5) * shape.cell
        coords = " L ".join(f"{x:.3f} {y:.3f}" for x, y in zip(xs, ys))
        paths.append(f"M {coords} Z")
    return paths


def render_svg(doc: LayoutDocument, shape: ShapeRegion) -> bytes:
    """One rectangle per item over the stroked shape outline.

    Items are drawn in ascending level order so that, when overlap is
    allowed, deeper images sit on top of their ancestors. Output is
    deterministic for a given document.
    """
    x0, y0, x1, y1 = shape.bbox
    margin = 0.02 * max(x1 - x0, y1 - y0)
    view = (x0 - margin, y0 - margin, (x1 - x0) + 2 * margin, (y1 - y0) + 2 * margin)
    colors = _branch_colors(doc)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{view[0]:.3f} {view[1]:.3f} {view[2]:.3f} {view[3]:.3f}">',
        f'<rect x="{view[0]:.3f}" y="{view[1]:.3f}" width="{view[2]:.3f}" '
        f'height="{view[3]:.3f}" fill="white"/>',
    ]
    for path in _outline_paths(shape):
        lines.append(f'<path d="{path}" fill="none" stroke="#222" stroke-width="1.5"/>')

    ordered = sorted(enumerate(doc.items), key=lambda pair: (pair[1].level, pair[0]))
    for _, item in ordered:
        left = item.x - item.w / 2.0
        top = item.y - item.h / 2.0
        if item.path:
            lines.append(
                f'<image href="{item.path}" x="{left:.3f}" y="{top:.3f}" '
                f'width="{item.w:.3f}" height="{item.h:.3f}" '
                f'preserveAspectRatio="none"><title>{item.id}</title></image>'
            )
        else:
            lines.append(
                f'<rect x="{left:.3f}" y="{top:.3f}" width="{item.w:.3f}" '
                f'height="{item.h:.3f}" fill="{colors[item.id]}" stroke="#333" '
                f'stroke-width="0.5"><title>{item.id}</title></rect>'
            )
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")
