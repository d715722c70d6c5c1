"""Dataset manifests: image records with split tags plus the per-dataset
parameters (annotation radius, stroke width, min_region_size, cluster
distance, matching tolerance, channel count).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class ManifestError(ValueError):
    pass


@dataclass
class ImageRecord:
    image_id: str
    image: str                  # path relative to the manifest file
    split: str                  # train | eval | test
    annotation: str = ""        # annotation JSON (optional)
    mask: str = ""              # ground-truth mask PNG (optional)


@dataclass
class DatasetManifest:
    name: str
    params: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    root: Path = field(default_factory=Path)

    def validate(self):
        seen = set()
        for rec in self.records:
            if rec.image_id in seen:
                raise ManifestError(f"duplicate image id {rec.image_id!r}")
            seen.add(rec.image_id)
            if rec.split not in ("train", "eval", "test"):
                raise ManifestError(f"unknown split {rec.split!r} for {rec.image_id!r}")
            if rec.split in ("train", "eval") and not (rec.annotation or rec.mask):
                raise ManifestError(
                    f"{rec.split} image {rec.image_id!r} has no ground truth")

    def split(self, tag):
        return [r for r in self.records if r.split == tag]

    def path(self, relative) -> Path:
        return self.root / relative


def save_manifest(manifest: DatasetManifest, path) -> None:
    manifest.validate()
    doc = {
        "name": manifest.name,
        "params": manifest.params,
        "images": [
            {"id": r.image_id, "image": r.image, "split": r.split,
             **({"annotation": r.annotation} if r.annotation else {}),
             **({"mask": r.mask} if r.mask else {})}
            for r in manifest.records],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    with open(path) as fh:
        doc = json.load(fh)
    manifest = DatasetManifest(
        name=doc.get("name", path.stem),
        params=doc.get("params", {}),
        records=[ImageRecord(image_id=r["id"], image=r["image"],
                             split=r.get("split", "train"),
                             annotation=r.get("annotation", ""),
                             mask=r.get("mask", ""))
                 for r in doc.get("images", [])],
        root=path.parent)
    manifest.validate()
    return manifest
