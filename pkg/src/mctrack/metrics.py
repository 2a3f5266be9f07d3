"""Tracking evaluation: success-plot AUC, center-error precision, and their
size-normalized variant, plus per-attribute aggregation.

Conventions follow the common single-object-tracking toolkits: success
uses a strict `iou > threshold` over 101 thresholds in [0, 1]; distance
precisions use an inclusive `error <= threshold` (51 thresholds, pixels up
to 50 or normalized error up to 0.5). Predicted frames are scored exactly
like observed ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .geometry import BoundingBox, center_distance, iou

IOU_THRESHOLDS = np.linspace(0.0, 1.0, 101)
DIST_THRESHOLDS = np.linspace(0.0, 50.0, 51)
NORM_THRESHOLDS = np.linspace(0.0, 0.5, 51)


class LengthMismatchError(ValueError):
    """Raised when prediction and ground-truth sequences differ in length."""


class EmptyGroupError(ValueError):
    """Raised when aggregation receives a tag with no reports."""


def _check_lengths(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> None:
    if len(pred) != len(gt) or len(pred) == 0:
        raise LengthMismatchError(
            f"need equal non-empty sequences, got {len(pred)} predictions and {len(gt)} truths"
        )


def success_curve(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> np.ndarray:
    _check_lengths(pred, gt)
    ious = np.array([iou(p, g) for p, g in zip(pred, gt)])
    return (ious[None, :] > IOU_THRESHOLDS[:, None]).mean(axis=1)


def success_auc(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> float:
    """Mean of the success curve over its 101 overlap thresholds."""
    return float(success_curve(pred, gt).mean())


def precision_curve(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> np.ndarray:
    _check_lengths(pred, gt)
    dists = np.array([center_distance(p, g) for p, g in zip(pred, gt)])
    return (dists[None, :] <= DIST_THRESHOLDS[:, None]).mean(axis=1)


def precision_at(
    pred: Sequence[BoundingBox], gt: Sequence[BoundingBox], threshold_px: float = 20.0
) -> float:
    """Fraction of frames whose center error is within threshold_px (inclusive)."""
    _check_lengths(pred, gt)
    hits = sum(1 for p, g in zip(pred, gt) if center_distance(p, g) <= threshold_px)
    return hits / len(pred)


def _norm_errors(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> np.ndarray:
    return np.array(
        [
            math.hypot((p.cx - g.cx) / g.w, (p.cy - g.cy) / g.h)
            for p, g in zip(pred, gt)
        ]
    )


def norm_precision_curve(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> np.ndarray:
    _check_lengths(pred, gt)
    errors = _norm_errors(pred, gt)
    return (errors[None, :] <= NORM_THRESHOLDS[:, None]).mean(axis=1)


def norm_precision(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> float:
    """Area under the size-normalized precision curve, normalized to [0, 1]."""
    return float(norm_precision_curve(pred, gt).mean())


@dataclass(frozen=True)
class EvalReport:
    n_frames: int
    auc: float
    precision_at_20: float
    p_norm: float
    success: tuple[float, ...]
    precision: tuple[float, ...]
    norm_precision: tuple[float, ...]


def evaluate(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> EvalReport:
    succ = success_curve(pred, gt)
    prec = precision_curve(pred, gt)
    nprec = norm_precision_curve(pred, gt)
    return EvalReport(
        n_frames=len(pred),
        auc=float(succ.mean()),
        precision_at_20=float(prec[20]),  # distance thresholds step 1 px
        p_norm=float(nprec.mean()),
        success=tuple(succ.tolist()),
        precision=tuple(prec.tolist()),
        norm_precision=tuple(nprec.tolist()),
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "n_frames": report.n_frames,
        "auc": report.auc,
        "precision_at_20": report.precision_at_20,
        "p_norm": report.p_norm,
        "curves": {
            "success_iou": report.success,
            "precision_px": report.precision,
            "precision_norm": report.norm_precision,
        },
        "thresholds": {
            "success_iou": IOU_THRESHOLDS.tolist(),
            "precision_px": DIST_THRESHOLDS.tolist(),
            "precision_norm": NORM_THRESHOLDS.tolist(),
        },
    }


def save_report(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")


def aggregate(groups: Mapping[str, Sequence[EvalReport]]) -> list[dict]:
    """Per-tag means, one row per tag in sorted order."""
    rows = []
    for tag in sorted(groups):
        reports = groups[tag]
        if not reports:
            raise EmptyGroupError(f"no reports for tag {tag!r}")
        rows.append(
            {
                "tag": tag,
                "auc": sum(r.auc for r in reports) / len(reports),
                "p20": sum(r.precision_at_20 for r in reports) / len(reports),
                "pnorm": sum(r.p_norm for r in reports) / len(reports),
                "n_seq": len(reports),
                "n_frames": sum(r.n_frames for r in reports),
            }
        )
    return rows


def aggregate_csv(rows: Sequence[dict]) -> str:
    lines = ["tag,auc,p20,pnorm,n_seq,n_frames"]
    for row in rows:
        lines.append(
            f"{row['tag']},{row['auc']:.6f},{row['p20']:.6f},{row['pnorm']:.6f},"
            f"{row['n_seq']},{row['n_frames']}"
        )
    return "\n".join(lines) + "\n"
