"""Run-level evaluation: pair predicted and ground-truth masks by image id,
score segmentation and detection per image, aggregate dataset means, and
emit CSV/JSON reports.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import AnalysisParams, region_label
from .imaging import gray_to_mask, read_image
from .metrics import DetectionScore, match_objects, segmentation_score

CSV_COLUMNS = ["image_id", "iou0", "iou1", "miou",
               "tp", "fp", "fn", "precision", "recall", "f1"]


class EvaluationError(ValueError):
    pass


@dataclass
class ImageScore:
    image_id: str
    iou0: float
    iou1: float
    miou: float
    detection: DetectionScore

    def row(self):
        d = self.detection
        return [self.image_id, f"{self.iou0:.6f}", f"{self.iou1:.6f}",
                f"{self.miou:.6f}", d.tp, d.fp, d.fn,
                f"{d.precision:.6f}", f"{d.recall:.6f}", f"{d.f1:.6f}"]


def score_pair(pred_mask, truth_mask, tolerance, min_region_size=0, image_id=""):
    seg = segmentation_score(pred_mask, truth_mask)
    params = AnalysisParams(min_region_size=min_region_size)
    pred_cents = [o.centroid for o in region_label(pred_mask, params)]
    true_cents = [o.centroid for o in region_label(truth_mask, AnalysisParams())]
    det = match_objects(pred_cents, true_cents, tolerance)
    return ImageScore(image_id=image_id, iou0=seg.iou_object,
                      iou1=seg.iou_background, miou=seg.miou, detection=det)


def _mask_files(directory):
    return {p.stem: p for p in sorted(Path(directory).glob("*.png"))}


def evaluate_run(predictions_dir, truths_dir, tolerance,
                 min_region_size=0, image_ids=None):
    """Score every paired mask; raises if an id has no partner."""
    preds = _mask_files(predictions_dir)
    truths = _mask_files(truths_dir)
    ids = sorted(image_ids) if image_ids is not None else sorted(truths)
    scores = []
    for image_id in ids:
        if image_id not in preds:
            raise EvaluationError(f"no prediction for image id {image_id!r}")
        if image_id not in truths:
            raise EvaluationError(f"no ground truth for image id {image_id!r}")
        pred = gray_to_mask(read_image(preds[image_id]))
        truth = gray_to_mask(read_image(truths[image_id]))
        if pred.shape != truth.shape:
            raise EvaluationError(f"size mismatch for image id {image_id!r}")
        scores.append(score_pair(pred, truth, tolerance, min_region_size, image_id))
    return scores


def aggregate(scores) -> dict:
    """Per-image means plus pooled detection counts."""
    if not scores:
        raise EvaluationError("no images evaluated")
    pooled = DetectionScore(
        tp=sum(s.detection.tp for s in scores),
        fp=sum(s.detection.fp for s in scores),
        fn=sum(s.detection.fn for s in scores))
    return {
        "images": len(scores),
        "mean_iou0": float(np.mean([s.iou0 for s in scores])),
        "mean_iou1": float(np.mean([s.iou1 for s in scores])),
        "mean_miou": float(np.mean([s.miou for s in scores])),
        "mean_precision": float(np.mean([s.detection.precision for s in scores])),
        "mean_recall": float(np.mean([s.detection.recall for s in scores])),
        "mean_f1": float(np.mean([s.detection.f1 for s in scores])),
        "pooled": {"tp": pooled.tp, "fp": pooled.fp, "fn": pooled.fn,
                   "precision": pooled.precision, "recall": pooled.recall,
                   "f1": pooled.f1},
    }


def write_report(scores, csv_path=None, json_path=None) -> dict:
    summary = aggregate(scores)
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for s in scores:
                writer.writerow(s.row())
    if json_path:
        doc = {
            "per_image": [
                {"image_id": s.image_id, "iou0": s.iou0, "iou1": s.iou1,
                 "miou": s.miou, "tp": s.detection.tp, "fp": s.detection.fp,
                 "fn": s.detection.fn, "precision": s.detection.precision,
                 "recall": s.detection.recall, "f1": s.detection.f1}
                for s in scores],
            "means": summary,
        }
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=1)
    return summary
