"""Figure rendering for reports: metric curves, sweeps, ablations, run traces.

Every report-producing CLI path drops PNG figures next to its delimited
output (disable with --no-figures). Uses the Agg backend; nothing here
opens a window.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .geometry import BoundingBox, center_distance
from .metrics import DIST_THRESHOLDS, IOU_THRESHOLDS, NORM_THRESHOLDS, EvalReport
from .results import FrameResult

PHASE_COLORS = {
    "uninit": "#bbbbbb",
    "init": "#bbbbbb",
    "stabilizing": "#ffd27f",
    "stable": "#9fd89f",
    "reset_stable": "#f29a9a",
}


def save_eval_figure(report: EvalReport, path: str | Path, title: str = "") -> Path:
    """Success / precision / normalized-precision curves in one row."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    axes[0].plot(IOU_THRESHOLDS, report.success)
    axes[0].set_xlabel("overlap threshold")
    axes[0].set_ylabel("success rate")
    axes[0].set_title(f"success (AUC {report.auc:.3f})")
    axes[1].plot(DIST_THRESHOLDS, report.precision)
    axes[1].set_xlabel("center error [px]")
    axes[1].set_ylabel("precision")
    axes[1].set_title(f"precision (P@20 {report.precision_at_20:.3f})")
    axes[2].plot(NORM_THRESHOLDS, report.norm_precision)
    axes[2].set_xlabel("normalized center error")
    axes[2].set_ylabel("precision")
    axes[2].set_title(f"normalized precision ({report.p_norm:.3f})")
    for ax in axes:
        ax.set_ylim(-0.02, 1.02)
        ax.grid(alpha=0.3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_sweep_figure(param: str, rows: Sequence[dict], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    values = [row["value"] for row in rows]
    ax.plot(values, [row["auc"] for row in rows], marker="o", label="AUC")
    ax.plot(values, [row["p20"] for row in rows], marker="s", label="P@20")
    ax.set_xlabel(param)
    ax.set_ylabel("mean score")
    ax.set_title(f"sensitivity to {param}")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_ablation_figure(rows: Sequence[dict], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    variants = [row["variant"] for row in rows]
    x = range(len(rows))
    width = 0.35
    ax.bar([i - width / 2 for i in x], [row["auc"] for row in rows], width, label="AUC")
    ax.bar([i + width / 2 for i in x], [row["p20"] for row in rows], width, label="P@20")
    ax.set_xticks(list(x))
    ax.set_xticklabels(variants)
    ax.set_ylabel("mean score")
    ax.set_title("module ablation")
    ax.grid(axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _phase_spans(results: Sequence[FrameResult]) -> list[tuple[int, int, str]]:
    spans = []
    start = 0
    for i in range(1, len(results) + 1):
        if i == len(results) or results[i].phase != results[start].phase:
            spans.append((start, i, results[start].phase))
            start = i
    return spans


def save_run_figure(
    results: Sequence[FrameResult],
    gt: Sequence[BoundingBox] | None,
    path: str | Path,
    title: str = "",
) -> Path:
    """Trajectory, per-frame center error with phase bands, and score traces."""
    fig, axes = plt.subplots(3, 1, figsize=(8, 8), height_ratios=[2, 1, 1])
    out_x = [r.box.cx for r in results]
    out_y = [r.box.cy for r in results]
    axes[0].plot(out_x, out_y, "-", color="tab:blue", label="output")
    if gt is not None:
        axes[0].plot([b.cx for b in gt], [b.cy for b in gt], "--", color="black", label="truth")
    axes[0].invert_yaxis()
    axes[0].set_title(title or "trajectory")
    axes[0].set_xlabel("x [px]")
    axes[0].set_ylabel("y [px]")
    axes[0].legend()
    axes[0].grid(alpha=0.3)

    frames = [r.frame for r in results]
    for start, end, phase in _phase_spans(results):
        for ax in axes[1:]:
            ax.axvspan(
                frames[start] - 0.5,
                frames[end - 1] + 0.5,
                color=PHASE_COLORS.get(phase, "#dddddd"),
                alpha=0.35,
                lw=0,
            )
    if gt is not None:
        errors = [center_distance(r.box, g) for r, g in zip(results, gt)]
        axes[1].plot(frames, errors, color="tab:red")
    axes[1].set_ylabel("center error [px]")
    axes[1].grid(alpha=0.3)

    axes[2].plot(frames, [r.s_sam for r in results], label="affinity", color="tab:blue")
    axes[2].plot(frames, [r.s_kf for r in results], label="motion", color="tab:green")
    axes[2].set_xlabel("frame")
    axes[2].set_ylabel("score")
    axes[2].legend(loc="upper right")
    axes[2].grid(alpha=0.3)

    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
