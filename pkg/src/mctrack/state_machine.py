"""Five-phase tracking state machine driven by affinity and motion scores.

Lifecycle: Uninitialized seeds everything from the first frame (Initialized
is a transient sub-state folded into frame 0) and drops into Stabilizing,
which counts consecutive high-confidence frames. Once the stability score
reaches its duration threshold the machine is Stable and runs the
four-branch decision logic below; sustained evidence loss falls through to
ResetStable, where the tracker coasts on pure motion prediction until a
high-confidence observation returns.

Stable-state branches, in priority order:
  adopt   s_sam > tau_h:            take best-affinity mask, update filter
  hold    tau_m < s_sam <= tau_h:   output the mask but skip the update
  rescue  s_sam <= tau_m, s_kf > tau_kf:
                                    take the mask best overlapping the
                                    prediction, update filter
  lost    otherwise:                coast; after reset_after consecutive
                                    lost frames, enter ResetStable
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .geometry import BoundingBox, iou
from .motion import MotionConfig, distance_gate, fused_select, motion_score
from .observer import CandidateMask


class NoCandidatesError(ValueError):
    """Raised when the first frame offers no candidate to initialize from."""


class Phase(Enum):
    UNINITIALIZED = "uninit"
    INITIALIZED = "init"
    STABILIZING = "stabilizing"
    STABLE = "stable"
    RESET_STABLE = "reset_stable"


class StableBranch(Enum):
    ADOPT = "adopt"
    HOLD = "hold"
    RESCUE = "rescue"
    LOST = "lost"


@dataclass(frozen=True)
class MachineConfig:
    """Thresholds and durations governing phase transitions."""

    tau_h: float = 0.3
    tau_m: float = 0.0
    tau_kf: float = 0.0
    stable_after: int = 12  # consecutive high-confidence frames to reach Stable
    reset_after: int = 5  # consecutive lost frames in Stable to reach ResetStable
    gated_recovery: bool = False  # also require the distance gate to leave ResetStable

    def __post_init__(self) -> None:
        if self.tau_m > self.tau_h:
            raise ValueError("tau_m must not exceed tau_h")
        if self.stable_after < 1 or self.reset_after < 1:
            raise ValueError("stable_after and reset_after must be >= 1")


@dataclass(frozen=True)
class MachineState:
    phase: Phase = Phase.UNINITIALIZED
    s_f: int = 0
    fail_count: int = 0


@dataclass(frozen=True)
class StepOutcome:
    """One frame's decision: what to output, how to drive the filter, what's next."""

    output_box: BoundingBox
    next_state: MachineState
    update_box: BoundingBox | None  # None means predict-only this frame
    selected: int | None
    s_sam: float
    s_kf: float


def _argmax_affinity(candidates: Sequence[CandidateMask]) -> int:
    return max(range(len(candidates)), key=lambda j: candidates[j].s_sam)


def stable_branch(s_sam: float, s_kf: float, cfg: MachineConfig) -> StableBranch:
    """Branch choice from the frame-level score maxima, thresholds applied literally."""
    if s_sam > cfg.tau_h:
        return StableBranch.ADOPT
    if s_sam > cfg.tau_m:
        return StableBranch.HOLD
    if s_kf > cfg.tau_kf:
        return StableBranch.RESCUE
    return StableBranch.LOST


def init_step(candidates: Sequence[CandidateMask]) -> StepOutcome:
    """Frame 0: adopt the highest-affinity candidate and start stabilizing."""
    if not candidates:
        raise NoCandidatesError("first frame produced no candidates")
    idx = _argmax_affinity(candidates)
    box = candidates[idx].stats.tight_box
    return StepOutcome(
        output_box=box,
        next_state=MachineState(Phase.STABILIZING, s_f=0, fail_count=0),
        update_box=box,
        selected=idx,
        s_sam=candidates[idx].s_sam,
        s_kf=0.0,
    )


def stabilizing_step(
    state: MachineState,
    candidates: Sequence[CandidateMask],
    predicted_box: BoundingBox,
    s_ref: float,
    cfg: MachineConfig,
    motion_cfg: MotionConfig,
) -> StepOutcome:
    """Fused selection; only high-confidence winners feed the filter and the count."""
    selection = None
    if candidates:
        selection = fused_select(
            [(c.stats, c.s_sam) for c in candidates], predicted_box, s_ref, motion_cfg
        )
    if selection is None:
        return StepOutcome(
            output_box=predicted_box,
            next_state=MachineState(Phase.STABILIZING, s_f=0, fail_count=0),
            update_box=None,
            selected=None,
            s_sam=0.0,
            s_kf=0.0,
        )
    cand = candidates[selection.index]
    box = cand.stats.tight_box
    if cand.s_sam > cfg.tau_h:
        s_f = min(state.s_f + 1, cfg.stable_after)
        phase = Phase.STABLE if s_f >= cfg.stable_after else Phase.STABILIZING
        return StepOutcome(
            output_box=box,
            next_state=MachineState(phase, s_f=s_f, fail_count=0),
            update_box=box,
            selected=selection.index,
            s_sam=cand.s_sam,
            s_kf=selection.s_kf,
        )
    return StepOutcome(
        output_box=box,
        next_state=MachineState(Phase.STABILIZING, s_f=0, fail_count=0),
        update_box=None,
        selected=selection.index,
        s_sam=cand.s_sam,
        s_kf=selection.s_kf,
    )


def stable_step(
    state: MachineState,
    candidates: Sequence[CandidateMask],
    predicted_box: BoundingBox,
    s_ref: float,
    cfg: MachineConfig,
    motion_cfg: MotionConfig,
    allow_reset: bool = True,
) -> StepOutcome:
    """Stable-state decision logic over the frame's score maxima.

    allow_reset=False keeps the machine Stable on lost frames (the
    "no reset phase" ablation); everything else is unchanged.
    """
    if candidates:
        best_idx = _argmax_affinity(candidates)
        s_sam = candidates[best_idx].s_sam
        kf_scores = [motion_score(predicted_box, s_ref, c.stats, motion_cfg) for c in candidates]
        s_kf = max(kf_scores)
        branch = stable_branch(s_sam, s_kf, cfg)
    else:
        s_sam = 0.0
        s_kf = 0.0
        branch = StableBranch.LOST

    if branch is StableBranch.ADOPT:
        box = candidates[best_idx].stats.tight_box
        return StepOutcome(
            output_box=box,
            next_state=MachineState(Phase.STABLE, s_f=state.s_f, fail_count=0),
            update_box=box,
            selected=best_idx,
            s_sam=s_sam,
            s_kf=s_kf,
        )
    if branch is StableBranch.HOLD:
        box = candidates[best_idx].stats.tight_box
        return StepOutcome(
            output_box=box,
            next_state=MachineState(Phase.STABLE, s_f=state.s_f, fail_count=0),
            update_box=None,
            selected=best_idx,
            s_sam=s_sam,
            s_kf=s_kf,
        )
    if branch is StableBranch.RESCUE:
        idx = max(
            range(len(candidates)),
            key=lambda j: iou(candidates[j].stats.tight_box, predicted_box),
        )
        box = candidates[idx].stats.tight_box
        return StepOutcome(
            output_box=box,
            next_state=MachineState(Phase.STABLE, s_f=state.s_f, fail_count=0),
            update_box=box,
            selected=idx,
            s_sam=s_sam,
            s_kf=s_kf,
        )
    fail = min(state.fail_count + 1, cfg.reset_after)
    if allow_reset and fail >= cfg.reset_after:
        next_state = MachineState(Phase.RESET_STABLE, s_f=0, fail_count=0)
    else:
        next_state = MachineState(Phase.STABLE, s_f=state.s_f, fail_count=fail)
    return StepOutcome(
        output_box=predicted_box,
        next_state=next_state,
        update_box=None,
        selected=None,
        s_sam=s_sam,
        s_kf=s_kf,
    )


def reset_stable_step(
    state: MachineState,
    candidates: Sequence[CandidateMask],
    predicted_box: BoundingBox,
    s_ref: float,
    cfg: MachineConfig,
    motion_cfg: MotionConfig,
) -> StepOutcome:
    """Coast on the prediction; a high-confidence candidate restarts stabilizing."""
    if candidates:
        best_idx = _argmax_affinity(candidates)
        cand = candidates[best_idx]
        s_sam = cand.s_sam
        s_kf = motion_score(predicted_box, s_ref, cand.stats, motion_cfg)
        gate_ok = (not cfg.gated_recovery) or bool(
            distance_gate(predicted_box, cand.stats, motion_cfg)
        )
        if s_sam > cfg.tau_h and gate_ok:
            box = cand.stats.tight_box
            return StepOutcome(
                output_box=box,
                next_state=MachineState(Phase.STABILIZING, s_f=1, fail_count=0),
                update_box=box,
                selected=best_idx,
                s_sam=s_sam,
                s_kf=s_kf,
            )
    else:
        s_sam = 0.0
        s_kf = 0.0
    return StepOutcome(
        output_box=predicted_box,
        next_state=MachineState(Phase.RESET_STABLE, s_f=0, fail_count=0),
        update_box=None,
        selected=None,
        s_sam=s_sam,
        s_kf=s_kf,
    )
