"""Annotation primitives (circles, polygons, lines) and their rasterization
into binary ground-truth masks, plus ingestion of externally painted
annotation images via dark-pixel thresholding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, ImageDraw

KINDS = ("circle", "polygon", "line")


class AnnotationError(ValueError):
    pass


@dataclass
class AnnotationSet:
    """All primitives of one image; one primitive kind per dataset.

    primitives:
      circle  -> [x, y] centers (shared radius)
      polygon -> [[x, y], ...] vertex lists (>= 3 points)
      line    -> [[x0, y0], [x1, y1]] endpoint pairs (shared stroke width)
    """

    image_id: str
    width: int
    height: int
    kind: str
    radius: float = 0.0
    stroke_width: float = 3.0
    primitives: list = field(default_factory=list)

    def validate(self):
        if self.kind not in KINDS:
            raise AnnotationError(f"unknown primitive kind {self.kind!r}")
        if self.kind == "circle" and self.radius < 0:
            raise AnnotationError("circle radius must be >= 0")
        for i, prim in enumerate(self.primitives):
            for x, y in _points_of(self.kind, prim):
                if not (0 <= x < self.width and 0 <= y < self.height):
                    raise AnnotationError(
                        f"primitive {i} out of bounds: point ({x}, {y})")
            if self.kind == "polygon":
                if len(prim) < 3:
                    raise AnnotationError(f"polygon {i} has fewer than 3 vertices")
                if _polygon_area(prim) <= 0:
                    raise AnnotationError(f"polygon {i} is degenerate (zero area)")

    def count_objects(self) -> int:
        return len(self.primitives)


def _points_of(kind, prim):
    if kind == "circle":
        return [tuple(prim)]
    return [tuple(p) for p in prim]


def _polygon_area(vertices) -> float:
    pts = np.asarray(vertices, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def save_annotations(ann: AnnotationSet, path) -> None:
    doc = {
        "image": ann.image_id,
        "width": ann.width,
        "height": ann.height,
        "kind": ann.kind,
        "primitives": ann.primitives,
    }
    if ann.kind == "circle":
        doc["radius"] = ann.radius
    if ann.kind == "line":
        doc["stroke_width"] = ann.stroke_width
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_annotations(path) -> AnnotationSet:
    with open(path) as fh:
        doc = json.load(fh)
    ann = AnnotationSet(
        image_id=doc["image"],
        width=int(doc["width"]),
        height=int(doc["height"]),
        kind=doc["kind"],
        radius=float(doc.get("radius", 0.0)),
        stroke_width=float(doc.get("stroke_width", 3.0)),
        primitives=doc["primitives"],
    )
    ann.validate()
    return ann


def _rasterize_circle(center, radius, width, height) -> np.ndarray:
    cx, cy = center
    r = int(np.ceil(radius))
    x0, x1 = max(0, int(np.floor(cx)) - r), min(width - 1, int(np.ceil(cx)) + r)
    y0, y1 = max(0, int(np.floor(cy)) - r), min(height - 1, int(np.ceil(cy)) + r)
    mask = np.zeros((height, width), dtype=bool)
    if x1 < x0 or y1 < y0:
        return mask
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    mask[y0:y1 + 1, x0:x1 + 1] = (xs - cx) ** 2 + (ys - cy) ** 2 <= radius ** 2
    return mask


def _rasterize_polygon(vertices, width, height) -> np.ndarray:
    im = Image.new("1", (width, height), 0)
    draw = ImageDraw.Draw(im)
    draw.polygon([tuple(map(float, p)) for p in vertices], fill=1, outline=1)
    return np.asarray(im, dtype=bool)


def _rasterize_line(endpoints, stroke_width, width, height) -> np.ndarray:
    (x0, y0), (x1, y1) = endpoints
    half = stroke_width / 2.0
    pad = int(np.ceil(half)) + 1
    bx0 = max(0, int(np.floor(min(x0, x1))) - pad)
    bx1 = min(width - 1, int(np.ceil(max(x0, x1))) + pad)
    by0 = max(0, int(np.floor(min(y0, y1))) - pad)
    by1 = min(height - 1, int(np.ceil(max(y0, y1))) + pad)
    mask = np.zeros((height, width), dtype=bool)
    if bx1 < bx0 or by1 < by0:
        return mask
    ys, xs = np.mgrid[by0:by1 + 1, bx0:bx1 + 1]
    dx, dy = x1 - x0, y1 - y0
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0:
        dist2 = (xs - x0) ** 2 + (ys - y0) ** 2
    else:
        t = np.clip(((xs - x0) * dx + (ys - y0) * dy) / seg_len2, 0.0, 1.0)
        dist2 = (xs - (x0 + t * dx)) ** 2 + (ys - (y0 + t * dy)) ** 2
    mask[by0:by1 + 1, bx0:bx1 + 1] = dist2 <= half * half
    return mask


def rasterize_primitive(ann: AnnotationSet, prim) -> np.ndarray:
    if ann.kind == "circle":
        return _rasterize_circle(prim, ann.radius, ann.width, ann.height)
    if ann.kind == "polygon":
        return _rasterize_polygon(prim, ann.width, ann.height)
    return _rasterize_line(prim, ann.stroke_width, ann.width, ann.height)


def rasterize(ann: AnnotationSet, check_overlap: bool = True) -> np.ndarray:
    """Paint all primitives into one mask; primitives must not overlap."""
    ann.validate()
    total = np.zeros((ann.height, ann.width), dtype=bool)
    prim_masks = []
    for i, prim in enumerate(ann.primitives):
        m = rasterize_primitive(ann, prim)
        if check_overlap and (total & m).any():
            for j, earlier in enumerate(prim_masks):
                if (earlier & m).any():
                    raise AnnotationError(
                        f"primitives {j} and {i} overlap")
        total |= m
        if check_overlap:
            prim_masks.append(m)
    return total


def binarize_annotated_image(img: np.ndarray, darkness_threshold: int) -> np.ndarray:
    """Object pixels are those whose brightest channel is <= the threshold."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        peak = arr
    else:
        peak = arr.max(axis=2)
    return peak <= darkness_threshold


def count_objects(ann: AnnotationSet) -> int:
    ann.validate()
    return ann.count_objects()
