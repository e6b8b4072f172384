"""Detection-set metrics: precision/recall/F1 and normalized centroid error."""

from __future__ import annotations

import math
from typing import Dict, Optional, Tuple

from ..core.types import DetectionSet


def detection_prf1(gt: DetectionSet, gen: DetectionSet
                   ) -> Tuple[float, float, float]:
    """Per-example set comparison of thresholded class sets.

    Conventions: both empty -> p = r = 1; predicted set empty with a
    non-empty ground truth -> p = 0; empty ground truth -> r = 1.
    """
    gt_set = gt.detected()
    gen_set = gen.detected()
    inter = len(gt_set & gen_set)
    if gen_set:
        precision = inter / len(gen_set)
    else:
        precision = 1.0 if not gt_set else 0.0
    recall = inter / len(gt_set) if gt_set else 1.0
    if precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def nrmse(gt_centroids: Dict[int, Tuple[float, float]],
          pred_centroids: Dict[int, Tuple[float, float]],
          canvas_side: float) -> Optional[float]:
    """Root mean squared centroid distance with coordinates normalized by
    the canvas side; None when no classes are matched."""
    matched = sorted(set(gt_centroids) & set(pred_centroids))
    if not matched:
        return None
    total = 0.0
    for c in matched:
        gx, gy = gt_centroids[c]
        px, py = pred_centroids[c]
        dx = (gx - px) / canvas_side
        dy = (gy - py) / canvas_side
        total += dx * dx + dy * dy
    return math.sqrt(total / len(matched))
