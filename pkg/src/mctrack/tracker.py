"""Per-frame tracking pipeline: filter, phase machine, memory gate, variants.

One Tracker instance owns one sequence. Each step runs exactly one filter
predict, at most one update (as directed by the phase logic), applies the
memory admission gate, and emits a FrameResult. The ablation variants
reshape the pipeline:

  full      everything below.
  no_kfcmm  no filter at all: argmax-affinity selection, phases driven by
            affinity alone, frozen last-observed box while lost.
  no_mcsm   no phases: fused selection every frame, every winner updates
            the filter, prediction output otherwise.
  no_rs     full machine, but lost frames never leave the Stable phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .geometry import BoundingBox
from .memory import GateThresholds, MemoryBank, admit
from .motion import (
    FilterState,
    KalmanModel,
    MotionConfig,
    fused_select,
    init_filter,
    motion_score,
    predict,
    update,
)
from .observer import CandidateMask, ObserverFrame
from .results import FrameResult
from .state_machine import (
    MachineConfig,
    MachineState,
    NoCandidatesError,
    Phase,
    StepOutcome,
    init_step,
    reset_stable_step,
    stabilizing_step,
    stable_step,
)

VARIANTS = ("full", "no_kfcmm", "no_mcsm", "no_rs")


class UnknownVariantError(ValueError):
    """Raised for a variant name outside VARIANTS."""


@dataclass
class TrackerConfig:
    machine: MachineConfig = field(default_factory=MachineConfig)
    motion: MotionConfig = field(default_factory=MotionConfig)
    gate: GateThresholds = field(default_factory=GateThresholds)
    model: KalmanModel = field(default_factory=KalmanModel.from_noise)
    memory_capacity: int = 16


class Tracker:
    """Single-target tracker over one sequence; deterministic given its inputs."""

    def __init__(
        self,
        prompt_box: BoundingBox,
        config: TrackerConfig | None = None,
        variant: str = "full",
    ):
        if variant not in VARIANTS:
            raise UnknownVariantError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
        self.config = config or TrackerConfig()
        self.variant = variant
        self.prompt_box = prompt_box
        self.machine = MachineState()
        self.filter: FilterState | None = None
        self.motion: MotionConfig = self.config.motion
        self.bank = MemoryBank(capacity=self.config.memory_capacity)
        self.predict_count = 0
        self.update_count = 0
        self._next_frame = 0
        self._last_observed = prompt_box  # for the filterless variant's frozen output

    # -- public API ------------------------------------------------------

    def step(self, frame: ObserverFrame) -> FrameResult:
        """Process one observer frame; frames must arrive contiguously from 0."""
        if frame.frame_index != self._next_frame:
            raise ValueError(
                f"expected frame {self._next_frame}, got {frame.frame_index}"
            )
        candidates = frame.candidates
        if self.variant == "no_kfcmm":
            result = self._step_appearance_only(candidates)
        elif self.variant == "no_mcsm":
            result = self._step_fused_only(candidates)
        else:
            result = self._step_machine(candidates, allow_reset=self.variant != "no_rs")
        self._next_frame += 1
        return result

    # -- full pipeline -----------------------------------------------------

    def _predict(self) -> BoundingBox:
        assert self.filter is not None
        self.filter, box = predict(self.filter, self.config.model)
        self.predict_count += 1
        return box

    def _update(self, box: BoundingBox) -> None:
        assert self.filter is not None
        self.filter = update(self.filter, box, self.config.model)
        self.update_count += 1

    def _init_frame(self, candidates: tuple[CandidateMask, ...]) -> tuple[StepOutcome, BoundingBox]:
        # The prompt picks the target; the selected first-frame mask seeds the
        # filter (zero frame-0 innovation, so no measurement noise leaks into
        # the velocity estimate through the prior covariance).
        outcome = init_step(candidates)
        chosen = candidates[outcome.selected]
        self.filter = init_filter(chosen.stats.tight_box, chosen.stats.area, self.config.model)
        self.motion = self.config.motion.resolve(self.filter.s_ref)
        predicted = self._predict()
        s_kf = motion_score(predicted, self.filter.s_ref, chosen.stats, self.motion)
        return replace(outcome, s_kf=s_kf), predicted

    def _step_machine(self, candidates: tuple[CandidateMask, ...], allow_reset: bool) -> FrameResult:
        phase = self.machine.phase
        if phase is Phase.UNINITIALIZED:
            outcome, predicted = self._init_frame(candidates)
        else:
            predicted = self._predict()
            s_ref = self.filter.s_ref
            if phase is Phase.STABILIZING:
                outcome = stabilizing_step(
                    self.machine, candidates, predicted, s_ref, self.config.machine, self.motion
                )
            elif phase is Phase.STABLE:
                outcome = stable_step(
                    self.machine,
                    candidates,
                    predicted,
                    s_ref,
                    self.config.machine,
                    self.motion,
                    allow_reset=allow_reset,
                )
            elif phase is Phase.RESET_STABLE:
                outcome = reset_stable_step(
                    self.machine, candidates, predicted, s_ref, self.config.machine, self.motion
                )
            else:  # pragma: no cover - INITIALIZED is transient
                raise RuntimeError(f"cannot step from phase {phase}")
        if outcome.update_box is not None:
            self._update(outcome.update_box)
        admitted = self._admit(outcome, candidates, predicted)
        self.machine = outcome.next_state
        return self._result(outcome, admitted)

    def _admit(
        self,
        outcome: StepOutcome,
        candidates: tuple[CandidateMask, ...],
        predicted: BoundingBox,
    ) -> bool:
        frame = self._next_frame
        if frame == 0:
            # The first frame carries the prompt and is always memorized.
            chosen = candidates[outcome.selected]
            self.bank = self.bank.push(frame, chosen.s_sam, chosen.s_obj, outcome.s_kf)
            return True
        if outcome.selected is None:
            return False
        chosen = candidates[outcome.selected]
        s_kf = motion_score(predicted, self.filter.s_ref, chosen.stats, self.motion)
        if admit(chosen.s_sam, chosen.s_obj, s_kf, self.config.gate):
            self.bank = self.bank.push(frame, chosen.s_sam, chosen.s_obj, s_kf)
            return True
        return False

    def _result(self, outcome: StepOutcome, admitted: bool) -> FrameResult:
        return FrameResult(
            frame=self._next_frame,
            box=outcome.output_box,
            phase=outcome.next_state.phase.value,
            s_sam=outcome.s_sam,
            s_kf=outcome.s_kf,
            mem_admit=admitted,
            selected=-1 if outcome.selected is None else outcome.selected,
        )

    # -- variant: fused selection only, no phases ---------------------------

    def _step_fused_only(self, candidates: tuple[CandidateMask, ...]) -> FrameResult:
        frame = self._next_frame
        if self.filter is None:
            outcome, predicted = self._init_frame(candidates)
            self._update(outcome.update_box)
            chosen = candidates[outcome.selected]
            self.bank = self.bank.push(frame, chosen.s_sam, chosen.s_obj, outcome.s_kf)
            return FrameResult(
                frame, outcome.output_box, Phase.STABLE.value, outcome.s_sam,
                outcome.s_kf, True, outcome.selected,
            )
        predicted = self._predict()
        selection = None
        if candidates:
            selection = fused_select(
                [(c.stats, c.s_sam) for c in candidates], predicted, self.filter.s_ref, self.motion
            )
        if selection is None:
            return FrameResult(frame, predicted, Phase.STABLE.value, 0.0, 0.0, False, -1)
        chosen = candidates[selection.index]
        box = chosen.stats.tight_box
        self._update(box)
        admitted = admit(chosen.s_sam, chosen.s_obj, selection.s_kf, self.config.gate)
        if admitted:
            self.bank = self.bank.push(frame, chosen.s_sam, chosen.s_obj, selection.s_kf)
        return FrameResult(
            frame, box, Phase.STABLE.value, chosen.s_sam, selection.s_kf, admitted, selection.index
        )

    # -- variant: appearance only, no filter --------------------------------

    def _step_appearance_only(self, candidates: tuple[CandidateMask, ...]) -> FrameResult:
        """Phase machine driven purely by affinity; lost frames freeze the output."""
        frame = self._next_frame
        cfg = self.config.machine
        if self.machine.phase is Phase.UNINITIALIZED:
            outcome = init_step(candidates)
            self.machine = outcome.next_state
            self._last_observed = outcome.output_box
            chosen = candidates[outcome.selected]
            self.bank = self.bank.push(frame, chosen.s_sam, chosen.s_obj, 0.0)
            return self._result(outcome, True)

        best = max(range(len(candidates)), key=lambda j: candidates[j].s_sam) if candidates else None
        s_sam = candidates[best].s_sam if best is not None else 0.0
        phase = self.machine.phase
        selected = -1
        out = self._last_observed
        if phase is Phase.STABILIZING:
            if best is not None and s_sam > cfg.tau_h:
                s_f = min(self.machine.s_f + 1, cfg.stable_after)
                next_phase = Phase.STABLE if s_f >= cfg.stable_after else Phase.STABILIZING
                self.machine = MachineState(next_phase, s_f=s_f, fail_count=0)
                out, selected = candidates[best].stats.tight_box, best
            else:
                self.machine = MachineState(Phase.STABILIZING, s_f=0, fail_count=0)
                if best is not None:
                    out, selected = candidates[best].stats.tight_box, best
        elif phase is Phase.STABLE:
            if best is not None and s_sam > cfg.tau_m:
                self.machine = MachineState(Phase.STABLE, s_f=self.machine.s_f, fail_count=0)
                out, selected = candidates[best].stats.tight_box, best
            else:
                fail = min(self.machine.fail_count + 1, cfg.reset_after)
                if fail >= cfg.reset_after:
                    self.machine = MachineState(Phase.RESET_STABLE, s_f=0, fail_count=0)
                else:
                    self.machine = MachineState(Phase.STABLE, s_f=self.machine.s_f, fail_count=fail)
        elif phase is Phase.RESET_STABLE:
            if best is not None and s_sam > cfg.tau_h:
                self.machine = MachineState(Phase.STABILIZING, s_f=1, fail_count=0)
                out, selected = candidates[best].stats.tight_box, best
        if selected >= 0:
            self._last_observed = out
        admitted = False
        if selected >= 0:
            chosen = candidates[selected]
            # Without a motion module the gate reduces to its appearance terms.
            if chosen.s_sam > self.config.gate.tau_mask and chosen.s_obj > self.config.gate.tau_obj:
                self.bank = self.bank.push(frame, chosen.s_sam, chosen.s_obj, 0.0)
                admitted = True
        return FrameResult(
            frame, out, self.machine.phase.value, s_sam, 0.0, admitted, selected
        )
