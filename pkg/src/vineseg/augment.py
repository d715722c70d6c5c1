"""Training-set augmentation: each patch gains exactly three modified
copies (one geometric, one rescaled, one blurred), quadrupling the set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .imaging import gaussian_blur
from .patching import Patch

GEOMETRIC_VARIANTS = ("flip-lr", "flip-tb", "transpose", "rot90", "rot180", "rot270")
SCALE_FACTORS = (0.8, 0.9, 1.1, 1.2)
BLUR_RADII = (1, 2)


@dataclass
class AugmentationChoice:
    geometric: str
    scale: float
    blur_radius: int


def draw_choice(seed) -> AugmentationChoice:
    """Uniform draw from each option set; accepts a seed or a Generator."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return AugmentationChoice(
        geometric=GEOMETRIC_VARIANTS[rng.integers(len(GEOMETRIC_VARIANTS))],
        scale=SCALE_FACTORS[rng.integers(len(SCALE_FACTORS))],
        blur_radius=BLUR_RADII[rng.integers(len(BLUR_RADII))],
    )


def apply_geometric(arr: np.ndarray, variant: str) -> np.ndarray:
    if variant == "flip-lr":
        return np.flip(arr, axis=1)
    if variant == "flip-tb":
        return np.flip(arr, axis=0)
    if variant == "transpose":
        return np.swapaxes(arr, 0, 1)
    if variant == "rot90":
        return np.rot90(arr, k=1, axes=(0, 1))
    if variant == "rot180":
        return np.rot90(arr, k=2, axes=(0, 1))
    if variant == "rot270":
        return np.rot90(arr, k=3, axes=(0, 1))
    raise ValueError(f"unknown geometric variant {variant!r}")


def _resize(arr: np.ndarray, side: int, nearest: bool) -> np.ndarray:
    resample = Image.NEAREST if nearest else Image.BILINEAR
    if arr.dtype == bool:
        im = Image.fromarray(arr.astype(np.uint8) * 255)
        out = im.resize((side, side), resample)
        return np.asarray(out) > 127
    im = Image.fromarray(np.ascontiguousarray(arr))
    return np.asarray(im.resize((side, side), resample))


def _restore_size(arr: np.ndarray, target: int) -> np.ndarray:
    side = arr.shape[0]
    if side == target:
        return arr
    if side > target:
        off = (side - target) // 2
        return arr[off:off + target, off:off + target]
    deficit = target - side
    before = deficit // 2
    pad = [(before, deficit - before), (before, deficit - before)]
    if arr.ndim == 3:
        pad.append((0, 0))
    return np.pad(arr, pad, mode="reflect")


def scale_patch(image: np.ndarray, mask: np.ndarray, factor: float):
    """Resample (bilinear image, nearest mask), then center-crop or
    reflect-pad back to the original side length."""
    target = image.shape[0]
    side = int(round(target * factor))
    img = _restore_size(_resize(image, side, nearest=False), target)
    msk = _restore_size(_resize(mask, side, nearest=True), target)
    return img, msk


def augment_patch(patch: Patch, choice: AugmentationChoice) -> list:
    """The three modified copies: geometric, rescaled, blurred."""
    if patch.mask is None:
        raise ValueError("augmentation needs a patch with an attached mask")
    geo = Patch(patch.x, patch.y,
                apply_geometric(patch.image, choice.geometric),
                apply_geometric(patch.mask, choice.geometric))
    simg, smask = scale_patch(patch.image, patch.mask, choice.scale)
    scaled = Patch(patch.x, patch.y, simg, smask)
    blurred = Patch(patch.x, patch.y,
                    gaussian_blur(patch.image, choice.blur_radius),
                    patch.mask.copy())
    return [geo, scaled, blurred]
