"""Independent reference implementations used to check the package.

Everything here is deliberately naive: textbook equations with explicit
matrix inverses, double loops over pixels/frames/thresholds, and literal
transcriptions of decision rules. Nothing imports the production code
paths it checks.
"""

from __future__ import annotations

import math

import numpy as np


# --- dense textbook Kalman filter --------------------------------------------


def kalman_predict(mean: np.ndarray, cov: np.ndarray, f: np.ndarray, q: np.ndarray):
    mean_prior = f @ mean
    cov_prior = f @ cov @ f.T + q
    return mean_prior, cov_prior


def kalman_update(
    mean: np.ndarray, cov: np.ndarray, z: np.ndarray, h: np.ndarray, r: np.ndarray
):
    innov = h @ cov @ h.T + r
    gain = cov @ h.T @ np.linalg.inv(innov)
    mean_post = mean + gain @ (z - h @ mean)
    cov_post = (np.eye(len(mean)) - gain @ h) @ cov
    return mean_post, cov_post


# --- pixel-loop mask statistics -----------------------------------------------


def pixel_loop_stats(grid: np.ndarray):
    """(area, centroid_x, centroid_y, left_col, top_row, right_col, bottom_row)."""
    height, width = grid.shape
    area = 0
    sum_x = 0.0
    sum_y = 0.0
    min_c, min_r = width, height
    max_c, max_r = -1, -1
    for r in range(height):
        for c in range(width):
            if grid[r, c]:
                area += 1
                sum_x += c
                sum_y += r
                min_c = min(min_c, c)
                max_c = max(max_c, c)
                min_r = min(min_r, r)
                max_r = max(max_r, r)
    if area == 0:
        return None
    return (area, sum_x / area, sum_y / area, min_c, min_r, max_c, max_r)


# --- box helpers on plain tuples (cx, cy, w, h) --------------------------------


def box_iou(a, b) -> float:
    ax1, ay1, ax2, ay2 = a[0] - a[2] / 2, a[1] - a[3] / 2, a[0] + a[2] / 2, a[1] + a[3] / 2
    bx1, by1, bx2, by2 = b[0] - b[2] / 2, b[1] - b[3] / 2, b[0] + b[2] / 2, b[1] + b[3] / 2
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a[2] * a[3] + b[2] * b[3] - inter)


# --- literal selection rule -----------------------------------------------------


def fused_select_oracle(candidates, predicted, s_ref, alpha, deform, d_max):
    """candidates: [(cx, cy, w, h, area, centroid_x, centroid_y, s_sam)].

    Returns (index, fused, s_kf) or None, with lowest-index tie-breaking.
    """
    lo, hi = deform
    scored = []
    for cand in candidates:
        cx, cy, w, h, area, mx, my, s_sam = cand
        ratio = s_ref / area
        s_kf = box_iou(predicted, (cx, cy, w, h)) if lo <= ratio <= hi else 0.0
        gate = 1 if math.hypot(predicted[0] - mx, predicted[1] - my) < d_max else 0
        scored.append((alpha * s_kf + (1 - alpha) * s_sam) * gate)
    best = 0
    for j in range(1, len(scored)):
        if scored[j] > scored[best]:
            best = j
    if scored[best] <= 0.0:
        return None
    ratio = s_ref / candidates[best][4]
    s_kf = (
        box_iou(predicted, candidates[best][:4]) if lo <= ratio <= hi else 0.0
    )
    return best, scored[best], s_kf


# --- memory replay ---------------------------------------------------------------


def memory_replay_oracle(stream, tau_mask, tau_obj, tau_kf, capacity):
    """stream: [(frame, s_mask, s_obj, s_kf)] -> frames retained, newest first."""
    admitted = [
        f
        for (f, sm, so, sk) in stream
        if sm > tau_mask and so > tau_obj and sk > tau_kf
    ]
    return list(reversed(admitted))[:capacity]


# --- metric double loops -----------------------------------------------------------


def auc_oracle(pred, gt) -> float:
    total = 0.0
    thresholds = [i / 100.0 for i in range(101)]
    for theta in thresholds:
        hits = sum(1 for p, g in zip(pred, gt) if box_iou(p, g) > theta)
        total += hits / len(pred)
    return total / len(thresholds)


def precision_oracle(pred, gt, threshold) -> float:
    hits = sum(
        1
        for p, g in zip(pred, gt)
        if math.hypot(p[0] - g[0], p[1] - g[1]) <= threshold
    )
    return hits / len(pred)


def pnorm_oracle(pred, gt) -> float:
    total = 0.0
    thresholds = [i * 0.01 for i in range(51)]
    for t in thresholds:
        hits = 0
        for p, g in zip(pred, gt):
            err = math.hypot((p[0] - g[0]) / g[2], (p[1] - g[1]) / g[3])
            if err <= t:
                hits += 1
        total += hits / len(pred)
    return total / len(thresholds)


# --- single-rectangle visibility ---------------------------------------------------


def visibility_oracle(target, occluder) -> float:
    """1 - covered fraction of target by one occluder, both (cx, cy, w, h)."""
    tx1, ty1 = target[0] - target[2] / 2, target[1] - target[3] / 2
    tx2, ty2 = target[0] + target[2] / 2, target[1] + target[3] / 2
    ox1, oy1 = occluder[0] - occluder[2] / 2, occluder[1] - occluder[3] / 2
    ox2, oy2 = occluder[0] + occluder[2] / 2, occluder[1] + occluder[3] / 2
    iw = max(0.0, min(tx2, ox2) - max(tx1, ox1))
    ih = max(0.0, min(ty2, oy2) - max(ty1, oy1))
    return 1.0 - (iw * ih) / (target[2] * target[3])


# --- literal Stable-state decision table ----------------------------------------------


def stable_branch_oracle(s_sam, s_kf, tau_h, tau_m, tau_kf) -> str:
    if s_sam > tau_h:
        return "adopt"
    elif tau_m < s_sam <= tau_h:
        return "hold"
    elif s_sam <= tau_m and s_kf > tau_kf:
        return "rescue"
    else:
        return "lost"
