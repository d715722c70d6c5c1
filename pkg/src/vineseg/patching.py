"""Cut large images into network-sized patches and recompose per-patch
probability tiles back into a full-resolution probability map.

Three tiling modes: adjacent grid, random origins (training), and an
overlapping grid (inference). When an image dimension is not a multiple of
the patch size, a final edge-aligned patch is appended so every pixel is
covered; overlapping pixels are averaged during recomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .imaging import InvalidInputError, ProbabilityMap

MODES = ("grid", "random", "overlap_grid")


@dataclass
class PatchSpec:
    patch_size: int = 224
    mode: str = "grid"
    overlap: Optional[int] = None   # defaults to patch_size // 2 in overlap_grid mode
    random_count: int = 100

    def effective_overlap(self) -> int:
        ov = self.patch_size // 2 if self.overlap is None else self.overlap
        if not 0 <= ov < self.patch_size:
            raise InvalidInputError(f"overlap {ov} outside [0, patch_size)")
        return ov


@dataclass
class Patch:
    x: int
    y: int
    image: np.ndarray
    mask: Optional[np.ndarray] = None


def _axis_origins(length: int, patch: int, stride: int) -> list:
    if length < patch:
        raise InvalidInputError(f"image side {length} smaller than patch {patch}")
    origins = list(range(0, length - patch + 1, stride))
    if origins[-1] != length - patch:
        origins.append(length - patch)
    return origins


def _extract(img, mask, xs, ys, p):
    patches = []
    for y in ys:
        for x in xs:
            patches.append(Patch(
                x=x, y=y,
                image=img[y:y + p, x:x + p],
                mask=None if mask is None else mask[y:y + p, x:x + p]))
    return patches


def grid_patches(img: np.ndarray, mask=None, spec: PatchSpec = PatchSpec()) -> list:
    """Adjacent cover; count = ceil(W/p) * ceil(H/p)."""
    p = spec.patch_size
    h, w = img.shape[:2]
    return _extract(img, mask, _axis_origins(w, p, p), _axis_origins(h, p, p), p)


def overlap_grid_patches(img: np.ndarray, spec: PatchSpec, mask=None) -> list:
    """Overlapping cover with stride patch_size - overlap."""
    p = spec.patch_size
    stride = p - spec.effective_overlap()
    h, w = img.shape[:2]
    return _extract(img, mask, _axis_origins(w, p, stride), _axis_origins(h, p, stride), p)


def random_patches(img: np.ndarray, mask, spec: PatchSpec, rng_seed: int) -> list:
    """Uniform random origins (with replacement), reproducible per seed."""
    p = spec.patch_size
    h, w = img.shape[:2]
    if h < p or w < p:
        raise InvalidInputError(f"image {w}x{h} smaller than patch {p}")
    if spec.random_count < 1:
        raise InvalidInputError("random_count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    xs = rng.integers(0, w - p + 1, size=spec.random_count)
    ys = rng.integers(0, h - p + 1, size=spec.random_count)
    return [Patch(x=int(x), y=int(y),
                  image=img[y:y + p, x:x + p],
                  mask=None if mask is None else mask[y:y + p, x:x + p])
            for x, y in zip(xs, ys)]


def recompose(tiles, width: int, height: int) -> ProbabilityMap:
    """Average per-pixel values of (x, y, tile) triples into one map.

    Every pixel of the target rectangle must be covered by at least one tile.
    """
    acc = np.zeros((height, width), dtype=np.float64)
    cov = np.zeros((height, width), dtype=np.int32)
    for x, y, tile in tiles:
        tile = np.asarray(tile, dtype=np.float64)
        th, tw = tile.shape
        if x < 0 or y < 0 or x + tw > width or y + th > height:
            raise InvalidInputError(f"tile at ({x}, {y}) exceeds target bounds")
        acc[y:y + th, x:x + tw] += tile
        cov[y:y + th, x:x + tw] += 1
    if (cov == 0).any():
        n = int((cov == 0).sum())
        raise InvalidInputError(f"incomplete coverage: {n} uncovered pixels")
    return ProbabilityMap(values=acc / cov, coverage=cov)
