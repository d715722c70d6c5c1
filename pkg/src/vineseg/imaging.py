"""Primitive raster operations: binarization, median filtering, Gaussian blur, PNG I/O.

Images are numpy uint8 arrays, shape (H, W) for grayscale or (H, W, C) with
C in {3, 4}. Binary masks are boolean (H, W) arrays where True marks an
object pixel. Probability maps store per-pixel *background* probabilities
in [0, 1]; the object probability is the complement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image


class InvalidInputError(ValueError):
    pass


@dataclass
class ProbabilityMap:
    """Background-pixel probabilities plus per-pixel accumulation counts."""

    values: np.ndarray   # float64 (H, W), in [0, 1]
    coverage: np.ndarray  # int (H, W), number of tiles that covered the pixel

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]


def _check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] in (3, 4):
        return img
    raise InvalidInputError(f"unsupported image shape {img.shape}")


def binarize(source, threshold: int = 127) -> np.ndarray:
    """Threshold a grayscale image or probability map into an object mask.

    A pixel is an object pixel iff its (scaled) background value is <= threshold.
    Probability maps are scaled by 255 before comparison.
    """
    if not 0 <= threshold <= 255:
        raise InvalidInputError(f"threshold {threshold} outside [0, 255]")
    if isinstance(source, ProbabilityMap):
        values = source.values * 255.0
    else:
        arr = np.asarray(source)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        if arr.ndim != 2:
            raise InvalidInputError("binarize needs a single-channel input")
        values = arr.astype(np.float64)
        if np.issubdtype(arr.dtype, np.floating):
            values = values * 255.0
    return values <= threshold


def median_filter_3x3(mask: np.ndarray) -> np.ndarray:
    """Majority vote over each 3x3 neighborhood; borders replicate the edge."""
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0:
        raise InvalidInputError("empty mask")
    padded = np.pad(mask.astype(np.uint8), 1, mode="edge")
    counts = np.zeros(mask.shape, dtype=np.int32)
    h, w = mask.shape
    for dy in range(3):
        for dx in range(3):
            counts += padded[dy:dy + h, dx:dx + w]
    return counts >= 5


def gaussian_kernel_1d(radius: int) -> np.ndarray:
    """Normalized Gaussian taps with sigma = radius and size 2*radius + 1."""
    if radius not in (1, 2):
        raise InvalidInputError(f"unsupported blur radius {radius}")
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs ** 2) / (2.0 * radius ** 2))
    return k / k.sum()


def gaussian_blur(img: np.ndarray, radius: int) -> np.ndarray:
    """Per-channel separable Gaussian blur, replicate borders, uint8 output."""
    img = _check_image(img)
    kernel = gaussian_kernel_1d(radius)
    squeeze = img.ndim == 2
    work = img[:, :, None] if squeeze else img
    acc = work.astype(np.float64)
    for axis in (0, 1):
        pad = [(0, 0)] * 3
        pad[axis] = (radius, radius)
        padded = np.pad(acc, pad, mode="edge")
        out = np.zeros_like(acc)
        for i, weight in enumerate(kernel):
            sl = [slice(None)] * 3
            sl[axis] = slice(i, i + acc.shape[axis])
            out += weight * padded[tuple(sl)]
        acc = out
    result = np.clip(np.rint(acc), 0, 255).astype(np.uint8)
    return result[:, :, 0] if squeeze else result


def read_image(path) -> np.ndarray:
    """Load a PNG as uint8 grayscale/RGB/RGBA array."""
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB", "RGBA"):
            if im.mode in ("1", "I", "P", "LA"):
                im = im.convert("L" if im.mode in ("1", "I") else "RGB")
            else:
                raise InvalidInputError(f"unsupported PNG mode {im.mode}")
        return np.asarray(im, dtype=np.uint8)


def write_image(img: np.ndarray, path) -> None:
    img = _check_image(img)
    mode = {2: "L"}.get(img.ndim) or {3: "RGB", 4: "RGBA"}[img.shape[2]]
    Image.fromarray(np.ascontiguousarray(img), mode=mode).save(path, format="PNG")


def mask_to_gray(mask: np.ndarray) -> np.ndarray:
    """Object pixels black (0), background white (255)."""
    mask = np.asarray(mask, dtype=bool)
    return np.where(mask, 0, 255).astype(np.uint8)


def gray_to_mask(img: np.ndarray, threshold: int = 127) -> np.ndarray:
    return binarize(img, threshold)


def probmap_to_gray(pmap: ProbabilityMap) -> np.ndarray:
    """Background probabilities as grayscale 0..255."""
    return np.clip(np.rint(pmap.values * 255.0), 0, 255).astype(np.uint8)
