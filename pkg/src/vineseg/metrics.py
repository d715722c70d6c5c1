"""Segmentation scores (per-class IoU, mIoU) and detection scores
(precision / recall / F1 from centroid-tolerance matching).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SegmentationScore:
    iou_object: float
    iou_background: float

    @property
    def miou(self) -> float:
        return (self.iou_object + self.iou_background) / 2.0


@dataclass
class DetectionScore:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """|A ∩ B| / |A ∪ B| of two boolean masks; 1.0 when both are empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    union = (a | b).sum()
    if union == 0:
        return 1.0
    return float((a & b).sum() / union)


def class_iou(prediction: np.ndarray, truth: np.ndarray, class_id: int) -> float:
    """IoU of the class-c pixel sets; class 0 = object, class 1 = background."""
    if class_id == 0:
        return iou(prediction, truth)
    if class_id == 1:
        return iou(~np.asarray(prediction, dtype=bool), ~np.asarray(truth, dtype=bool))
    raise ValueError(f"unknown class {class_id}")


def segmentation_score(prediction: np.ndarray, truth: np.ndarray) -> SegmentationScore:
    return SegmentationScore(iou_object=class_iou(prediction, truth, 0),
                             iou_background=class_iou(prediction, truth, 1))


def dataset_miou(scores) -> float:
    """Mean of per-image mIoU values."""
    scores = list(scores)
    if not scores:
        raise ValueError("no image scores to average")
    return float(np.mean([s.miou for s in scores]))


def match_objects(predicted, truth, tolerance: float) -> DetectionScore:
    """Greedy one-to-one matching of centroids closer than the tolerance.

    Candidate pairs are processed by ascending distance; a pair is accepted
    when both endpoints are still unmatched. Matched pairs are true
    positives, leftover predictions false positives, leftover truths false
    negatives.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be > 0")
    pred = np.asarray([tuple(p) for p in predicted], dtype=np.float64).reshape(-1, 2)
    true = np.asarray([tuple(t) for t in truth], dtype=np.float64).reshape(-1, 2)
    candidates = []
    for i, p in enumerate(pred):
        d = np.hypot(true[:, 0] - p[0], true[:, 1] - p[1])
        for j in np.nonzero(d < tolerance)[0]:
            candidates.append((float(d[j]), i, int(j)))
    candidates.sort()
    pred_used = np.zeros(len(pred), dtype=bool)
    true_used = np.zeros(len(true), dtype=bool)
    tp = 0
    for _, i, j in candidates:
        if not pred_used[i] and not true_used[j]:
            pred_used[i] = True
            true_used[j] = True
            tp += 1
    return DetectionScore(tp=tp, fp=int((~pred_used).sum()), fn=int((~true_used).sum()))
