"""Object detection and measurement on post-processed masks: 8-connected
region labeling with a minimum-size filter, distance-threshold clustering of
centroids, and pedicel length estimation from bounding-box extents.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class DetectedObject:
    label: int
    pixel_count: int
    centroid: tuple        # (x, y) floats
    bbox: tuple            # (min_x, min_y, max_x, max_y) inclusive


@dataclass
class ClusterResult:
    assignments: list      # cluster id per object, same order as input
    cluster_count: int
    member_counts: list    # per-cluster object counts


@dataclass
class AnalysisParams:
    min_region_size: int = 0
    cluster_distance_threshold: float = 10.0
    pedicel_top_n: tuple = (1, 10, 15, None)   # None = all detected


class _UnionFind:
    def __init__(self):
        self.parent = []

    def make(self):
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i):
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _label_array(mask: np.ndarray) -> np.ndarray:
    """Two-pass 8-connectivity labeling; 0 = background, labels start at 1
    in raster-scan order of first appearance."""
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    uf = _UnionFind()
    uf.make()   # index 0 reserved for background
    for y in range(h):
        row = mask[y]
        for x in range(w):
            if not row[x]:
                continue
            neighbors = []
            if x > 0 and mask[y, x - 1]:
                neighbors.append(labels[y, x - 1])
            if y > 0:
                if mask[y - 1, x]:
                    neighbors.append(labels[y - 1, x])
                if x > 0 and mask[y - 1, x - 1]:
                    neighbors.append(labels[y - 1, x - 1])
                if x + 1 < w and mask[y - 1, x + 1]:
                    neighbors.append(labels[y - 1, x + 1])
            if neighbors:
                lab = min(neighbors)
                for other in neighbors:
                    if other != lab:
                        uf.union(lab, other)
            else:
                lab = uf.make()
            labels[y, x] = lab
    # second pass: resolve unions, then renumber by raster order of appearance
    roots = np.array([uf.find(i) for i in range(len(uf.parent))], dtype=np.int32)
    labels = roots[labels]
    remap = {}
    flat = labels.ravel()
    order = np.nonzero(flat)[0]
    for pos in order:
        root = flat[pos]
        if root not in remap:
            remap[root] = len(remap) + 1
    lut = np.zeros(len(uf.parent), dtype=np.int32)
    for root, new in remap.items():
        lut[root] = new
    return lut[labels]


def region_label(mask: np.ndarray, params: AnalysisParams = AnalysisParams()) -> list:
    """Detected objects of a mask: 8-connected components of at least
    min_region_size pixels, labeled in raster-scan order."""
    mask = np.asarray(mask, dtype=bool)
    labels = _label_array(mask)
    n = int(labels.max())
    if n == 0:
        return []
    ys, xs = np.nonzero(labels)
    labs = labels[ys, xs]
    counts = np.bincount(labs, minlength=n + 1)
    sum_x = np.bincount(labs, weights=xs, minlength=n + 1)
    sum_y = np.bincount(labs, weights=ys, minlength=n + 1)
    min_x = np.full(n + 1, np.iinfo(np.int32).max)
    min_y = np.full(n + 1, np.iinfo(np.int32).max)
    max_x = np.full(n + 1, -1)
    max_y = np.full(n + 1, -1)
    np.minimum.at(min_x, labs, xs)
    np.minimum.at(min_y, labs, ys)
    np.maximum.at(max_x, labs, xs)
    np.maximum.at(max_y, labs, ys)
    objects = []
    for lab in range(1, n + 1):
        count = int(counts[lab])
        if count < params.min_region_size:
            continue
        objects.append(DetectedObject(
            label=len(objects) + 1,
            pixel_count=count,
            centroid=(sum_x[lab] / count, sum_y[lab] / count),
            bbox=(int(min_x[lab]), int(min_y[lab]), int(max_x[lab]), int(max_y[lab])),
        ))
    return objects


def cluster_objects(objects, params: AnalysisParams) -> ClusterResult:
    """Single-linkage clusters of centroids: two objects share a cluster iff
    they are connected through pairs closer than the distance threshold."""
    t = params.cluster_distance_threshold
    if t <= 0:
        raise ValueError("cluster distance threshold must be > 0")
    n = len(objects)
    if n == 0:
        return ClusterResult(assignments=[], cluster_count=0, member_counts=[])
    pts = np.array([o.centroid for o in objects], dtype=np.float64)
    uf = _UnionFind()
    for _ in range(n):
        uf.make()
    for i in range(n):
        d = np.hypot(pts[i + 1:, 0] - pts[i, 0], pts[i + 1:, 1] - pts[i, 1])
        for j in np.nonzero(d < t)[0]:
            uf.union(i, int(i + 1 + j))
    roots = [uf.find(i) for i in range(n)]
    ids = {}
    for r in sorted(set(roots), key=lambda r: min(i for i in range(n) if roots[i] == r)):
        ids[r] = len(ids)
    assignments = [ids[r] for r in roots]
    member_counts = [0] * len(ids)
    for a in assignments:
        member_counts[a] += 1
    return ClusterResult(assignments=assignments,
                         cluster_count=len(ids),
                         member_counts=member_counts)


def pedicel_length(obj: DetectedObject) -> float:
    """Length from the bounding-box extents via the hypotenuse."""
    x0, y0, x1, y1 = obj.bbox
    return float(np.hypot(x1 - x0, y1 - y0))


def pedicel_lengths(objects, top_n_list=(1, 10, 15, None)) -> dict:
    """Mean length of the n longest pedicels for each requested n.

    n = None means all detected; n is capped at the object count. Keys of
    the returned dict are the requested n values ("all" for None).
    """
    lengths = sorted((pedicel_length(o) for o in objects), reverse=True)
    out = {}
    for n in top_n_list:
        key = "all" if n is None else n
        if not lengths:
            out[key] = 0.0
            continue
        take = len(lengths) if n is None else min(n, len(lengths))
        out[key] = float(np.mean(lengths[:take]))
    return out
