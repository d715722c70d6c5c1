"""Pipeline orchestration shared by the CLI commands: building training
patch sets per evaluation mode, tiled segmentation of full images, and mask
analysis reports.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import annotation as ann_mod
from .analysis import AnalysisParams, cluster_objects, pedicel_lengths, region_label
from .augment import augment_patch, draw_choice
from .imaging import (binarize, gray_to_mask, mask_to_gray, median_filter_3x3,
                      probmap_to_gray, read_image)
from .manifest import DatasetManifest, ManifestError
from .patching import PatchSpec, grid_patches, overlap_grid_patches, random_patches, recompose
from .net import Network

TRAIN_MODES = ("5-cover", "5-cover-da", "all-cover", "all-rand-da")
TILINGS = ("adjacent", "overlap50")


def load_ground_truth(manifest: DatasetManifest, record) -> np.ndarray:
    if record.mask:
        return gray_to_mask(read_image(manifest.path(record.mask)))
    if record.annotation:
        return ann_mod.rasterize(ann_mod.load_annotations(manifest.path(record.annotation)))
    raise ManifestError(f"image {record.image_id!r} has no ground truth")


def load_image(manifest: DatasetManifest, record, channels=3) -> np.ndarray:
    img = read_image(manifest.path(record.image))
    have = 1 if img.ndim == 2 else img.shape[2]
    if have != channels:
        raise ManifestError(
            f"image {record.image_id!r} has {have} channels, expected {channels}")
    return img


def training_patches(manifest: DatasetManifest, mode: str, patch_size: int,
                     random_count: int = 100, seed: int = 0, channels: int = 3):
    """Patch set for one of the four evaluation modes."""
    if mode not in TRAIN_MODES:
        raise ValueError(f"unknown training mode {mode!r}; pick one of {TRAIN_MODES}")
    records = manifest.split("train")
    if not records:
        raise ManifestError("manifest has no train split")
    if mode.startswith("5-"):
        records = records[:5]
    spec = PatchSpec(patch_size=patch_size, random_count=random_count)
    patches = []
    for i, rec in enumerate(records):
        img = load_image(manifest, rec, channels)
        mask = load_ground_truth(manifest, rec)
        if mode == "all-rand-da":
            patches.extend(random_patches(img, mask, spec, rng_seed=seed + i))
        else:
            patches.extend(grid_patches(img, mask, spec))
    if mode.endswith("-da"):
        rng = np.random.default_rng(seed + 10_000)
        augmented = []
        for p in patches:
            augmented.append(p)
            augmented.extend(augment_patch(p, draw_choice(rng)))
        patches = augmented
    return patches


def segment_image(net: Network, img: np.ndarray, tiling: str = "adjacent",
                  threshold: int = 127, threads: int = 1):
    """Tile, predict, recompose, binarize and median-filter one image.

    Returns (probability map, post-processed mask).
    """
    if tiling not in TILINGS:
        raise ValueError(f"unknown tiling {tiling!r}; pick one of {TILINGS}")
    side = net.config.input_side
    spec = PatchSpec(patch_size=side)
    if tiling == "adjacent":
        patches = grid_patches(img, None, spec)
    else:
        spec.mode = "overlap_grid"
        patches = overlap_grid_patches(img, spec)

    def predict(p):
        return (p.x, p.y, net.predict_background(p.image))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tiles = list(pool.map(predict, patches))
    else:
        tiles = [predict(p) for p in patches]
    h, w = img.shape[:2]
    pmap = recompose(tiles, w, h)
    mask = median_filter_3x3(binarize(pmap, threshold))
    return pmap, mask


def analyze_mask(mask: np.ndarray, params: AnalysisParams,
                 kind: str = "", image_id: str = "") -> dict:
    """Per-image analysis report: objects, clusters, pedicel lengths."""
    objects = region_label(mask, params)
    report = {
        "image_id": image_id,
        "object_count": len(objects),
        "objects": [
            {"label": o.label, "pixel_count": o.pixel_count,
             "centroid": [round(o.centroid[0], 3), round(o.centroid[1], 3)],
             "bbox": list(o.bbox)}
            for o in objects],
    }
    clusters = cluster_objects(objects, params)
    report["clusters"] = {
        "count": clusters.cluster_count,
        "member_counts": clusters.member_counts,
        "assignments": clusters.assignments,
    }
    if kind == "line":
        report["pedicel_lengths"] = pedicel_lengths(objects, params.pedicel_top_n)
    return report


def write_json(doc, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
