"""Segmentation quality metrics and training-loss reference values.

Empty-vs-empty comparisons score 1.0 (predicting "no lesion" on a truly
empty image is a perfect answer); empty-vs-nonempty scores 0.0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .masks import bounding_box
from .validation import as_binary_mask, as_probability_mask, check_same_shape

DICE_EPSILON = 1e-6
BCE_CLIP = 1e-7


@dataclass(frozen=True)
class MetricReport:
    """Per-image evaluation record."""

    image_id: str
    mask_iou: float
    bbox_iou: float
    dice: float


def _counts(a, b) -> tuple[int, int, int]:
    a = as_binary_mask(a, "a")
    b = as_binary_mask(b, "b")
    check_same_shape(a, b)
    inter = int((a & b).sum())
    return inter, int(a.sum()), int(b.sum())


def mask_iou(a, b) -> float:
    """Intersection over union of two pixel sets; 1.0 when both are empty."""
    inter, na, nb = _counts(a, b)
    union = na + nb - inter
    if union == 0:
        return 1.0
    return inter / union


def dice_coeff(a, b) -> float:
    """2|a&b| / (|a|+|b|); 1.0 when both masks are empty."""
    inter, na, nb = _counts(a, b)
    if na + nb == 0:
        return 1.0
    return 2.0 * inter / (na + nb)


def bbox_iou(a, b) -> float:
    """IoU of the tight foreground bounding boxes (inclusive pixel areas)."""
    a = as_binary_mask(a, "a")
    b = as_binary_mask(b, "b")
    check_same_shape(a, b)
    box_a = bounding_box(a)
    box_b = bounding_box(b)
    if box_a is None and box_b is None:
        return 1.0
    if box_a is None or box_b is None:
        return 0.0
    ix_min = max(box_a.x_min, box_b.x_min)
    iy_min = max(box_a.y_min, box_b.y_min)
    ix_max = min(box_a.x_max, box_b.x_max)
    iy_max = min(box_a.y_max, box_b.y_max)
    if ix_min > ix_max or iy_min > iy_max:
        return 0.0
    inter = (ix_max - ix_min + 1) * (iy_max - iy_min + 1)
    union = box_a.area + box_b.area - inter
    return inter / union


def dice_loss(prob, gt, epsilon: float = DICE_EPSILON) -> float:
    """Soft dice loss: 1 - (2*sum(p*g) + eps) / (sum(p) + sum(g) + eps)."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    p = as_probability_mask(prob, "prob")
    g = as_binary_mask(gt, "gt").astype(np.float64)
    check_same_shape(p, g, "prob", "gt")
    num = 2.0 * float((p * g).sum()) + epsilon
    den = float(p.sum()) + float(g.sum()) + epsilon
    return 1.0 - num / den


def bce_loss(prob, gt, clip: float = BCE_CLIP) -> float:
    """Mean binary cross-entropy with probability clipping to [clip, 1-clip]."""
    if not 0.0 < clip < 0.5:
        raise ValueError(f"clip must be in (0, 0.5), got {clip}")
    p = as_probability_mask(prob, "prob")
    g = as_binary_mask(gt, "gt").astype(np.float64)
    check_same_shape(p, g, "prob", "gt")
    p = np.clip(p, clip, 1.0 - clip)
    terms = g * np.log(p) + (1.0 - g) * np.log(1.0 - p)
    return float(-terms.mean())


def evaluate_pair(pred, gt, image_id: str = "") -> MetricReport:
    """Mask IoU, bbox IoU and Dice for one prediction/ground-truth pair."""
    return MetricReport(
        image_id=image_id,
        mask_iou=mask_iou(pred, gt),
        bbox_iou=bbox_iou(pred, gt),
        dice=dice_coeff(pred, gt),
    )
