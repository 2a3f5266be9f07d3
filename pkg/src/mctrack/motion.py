"""Constrained linear Kalman motion model and motion-aware candidate selection.

The filter tracks a 9-vector [x, y, w, h, vx, vy, vw, vh, S]: box center,
box size, their per-frame rates, and the reference mask area S. S is held
constant after initialization (rigid target, near-constant apparent area),
which the transition matrix, zero process noise, and an explicit copy all
enforce bitwise.

On top of the filter sit the per-candidate scores used for selection:
a motion-consistency score (predicted-box IoU, zeroed outside an allowed
area-deformation range), a center-distance gate, and the fused
appearance+motion score that picks the winning candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import BoundingBox, MaskStats, center_distance, iou

STATE_DIM = 9
MEAS_DIM = 4

# Engineering defaults (px^2-units); size is noisier to measure than
# position, velocities start uncertain but wander slowly (near-constant
# motion), S is deterministic.
DEFAULT_Q_DIAG = (0.5, 0.5, 0.125, 0.125, 0.001, 0.001, 0.00025, 0.00025, 0.0)
DEFAULT_R_DIAG = (1.0, 1.0, 4.0, 4.0)
DEFAULT_P0_DIAG = (10.0, 10.0, 10.0, 10.0, 100.0, 100.0, 25.0, 25.0, 0.0)

MIN_BOX_SIDE = 0.5  # px; keeps noisy updates from collapsing the box


class InvalidPromptError(ValueError):
    """Raised when the initial box or mask area cannot seed the filter."""


class SingularInnovationError(RuntimeError):
    """Raised when the innovation covariance is not positive definite."""


class EmptyCandidatesError(ValueError):
    """Raised when selection is asked to choose from zero candidates."""


@dataclass(frozen=True)
class MotionConfig:
    """Weights and gates for motion-aware candidate selection.

    d_max=None means "adaptive": resolve() substitutes sqrt(S_ref), the
    side length of a square with the initial mask area.
    """

    alpha_kf: float = 0.2
    deform_range: tuple[float, float] = (0.5, 2.0)
    d_max: float | None = None
    tau_kf: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha_kf <= 1.0:
            raise ValueError(f"alpha_kf must be in [0,1], got {self.alpha_kf}")
        lo, hi = self.deform_range
        if not (0.0 < lo <= 1.0 <= hi):
            raise ValueError(f"deform_range must satisfy 0 < lo <= 1 <= hi, got {self.deform_range}")
        if self.d_max is not None and not self.d_max > 0:
            raise ValueError(f"d_max must be positive, got {self.d_max}")

    def resolve(self, s_ref: float) -> "MotionConfig":
        """Concrete config for a run: adaptive d_max becomes sqrt(S_ref)."""
        if self.d_max is not None:
            return self
        return MotionConfig(self.alpha_kf, self.deform_range, math.sqrt(s_ref), self.tau_kf)


@dataclass
class KalmanModel:
    """Transition/measurement matrices and noise for the 9-state filter."""

    dt: float
    f: np.ndarray
    h: np.ndarray
    q: np.ndarray
    r: np.ndarray
    p0: np.ndarray

    @classmethod
    def from_noise(
        cls,
        dt: float = 1.0,
        q_diag: Sequence[float] = DEFAULT_Q_DIAG,
        r_diag: Sequence[float] = DEFAULT_R_DIAG,
        p0_diag: Sequence[float] = DEFAULT_P0_DIAG,
    ) -> "KalmanModel":
        """Build the model from diagonal noise terms.

        The transition couples position/size to their rates with step dt
        and leaves the area row fully isolated (no velocity, no noise).
        """
        if len(q_diag) != STATE_DIM or len(p0_diag) != STATE_DIM:
            raise ValueError("q_diag and p0_diag must have 9 entries")
        if len(r_diag) != MEAS_DIM:
            raise ValueError("r_diag must have 4 entries")
        f = np.eye(STATE_DIM)
        f[:4, 4:8] = dt * np.eye(4)
        h = np.zeros((MEAS_DIM, STATE_DIM))
        h[:4, :4] = np.eye(4)
        return cls(
            dt=dt,
            f=f,
            h=h,
            q=np.diag(np.asarray(q_diag, dtype=float)),
            r=np.diag(np.asarray(r_diag, dtype=float)),
            p0=np.diag(np.asarray(p0_diag, dtype=float)),
        )


@dataclass(frozen=True)
class FilterState:
    """Posterior mean/covariance plus the immutable reference area S_ref."""

    mean: np.ndarray
    cov: np.ndarray
    s_ref: float

    def box(self) -> BoundingBox:
        return BoundingBox(*self.mean[:4])


def _clamped(mean: np.ndarray) -> np.ndarray:
    if mean[2] < MIN_BOX_SIDE:
        mean[2] = MIN_BOX_SIDE
    if mean[3] < MIN_BOX_SIDE:
        mean[3] = MIN_BOX_SIDE
    return mean


def init_filter(prompt_box: BoundingBox, mask_area: float, model: KalmanModel) -> FilterState:
    """Seed the filter from the prompt box with zero rates and area S = mask_area."""
    if not mask_area > 0:
        raise InvalidPromptError(f"mask area must be positive, got {mask_area}")
    mean = np.zeros(STATE_DIM)
    mean[:4] = (prompt_box.cx, prompt_box.cy, prompt_box.w, prompt_box.h)
    mean[8] = mask_area
    return FilterState(mean=mean, cov=model.p0.copy(), s_ref=float(mask_area))


def predict(state: FilterState, model: KalmanModel) -> tuple[FilterState, BoundingBox]:
    """Time update: propagate mean and covariance, return the prior box."""
    s = state.mean[8]
    mean = _clamped(model.f @ state.mean)
    mean[8] = s
    cov = model.f @ state.cov @ model.f.T + model.q
    cov = (cov + cov.T) / 2.0
    prior = FilterState(mean=mean, cov=cov, s_ref=state.s_ref)
    return prior, prior.box()


def update(state: FilterState, measurement: BoundingBox, model: KalmanModel) -> FilterState:
    """Measurement update with z = [cx, cy, w, h]; the area component is untouched."""
    innov_cov = model.h @ state.cov @ model.h.T + model.r
    try:
        np.linalg.cholesky(innov_cov)
    except np.linalg.LinAlgError as exc:
        raise SingularInnovationError("innovation covariance is not positive definite") from exc
    gain = np.linalg.solve(innov_cov, (state.cov @ model.h.T).T).T
    z = np.array([measurement.cx, measurement.cy, measurement.w, measurement.h])
    s = state.mean[8]
    mean = _clamped(state.mean + gain @ (z - model.h @ state.mean))
    mean[8] = s
    cov = (np.eye(STATE_DIM) - gain @ model.h) @ state.cov
    cov = (cov + cov.T) / 2.0
    return FilterState(mean=mean, cov=cov, s_ref=state.s_ref)


def motion_score(
    predicted: BoundingBox, s_ref: float, candidate: MaskStats, cfg: MotionConfig
) -> float:
    """Motion consistency of a candidate against the predicted box.

    IoU between the prediction and the candidate's tight box, or 0 when
    the area ratio S_ref / S_candidate leaves the allowed deformation
    range (the candidate grew or shrank implausibly).
    """
    lo, hi = cfg.deform_range
    ratio = s_ref / candidate.area
    if not lo <= ratio <= hi:
        return 0.0
    return iou(predicted, candidate.tight_box)


def distance_gate(predicted: BoundingBox, candidate: MaskStats, cfg: MotionConfig) -> int:
    """1 if the candidate centroid is strictly within d_max of the prediction."""
    if cfg.d_max is None:
        raise ValueError("distance gate needs a resolved d_max")
    cx, cy = candidate.centroid
    d = math.hypot(predicted.cx - cx, predicted.cy - cy)
    return 1 if d < cfg.d_max else 0


class Selection(NamedTuple):
    index: int
    fused: float
    s_kf: float


def fused_select(
    candidates: Sequence[tuple[MaskStats, float]],
    predicted: BoundingBox,
    s_ref: float,
    cfg: MotionConfig,
) -> Selection | None:
    """Pick the candidate maximizing the gated blend of motion and affinity.

    Score per candidate j: (alpha_kf * s_kf_j + (1 - alpha_kf) * s_sam_j) * U_j
    with U_j the distance gate. Ties break to the lowest index. Returns
    None when every fused score is 0 (no viable candidate this frame).
    """
    if not candidates:
        raise EmptyCandidatesError("no candidates to select from")
    best: Selection | None = None
    for j, (stats, s_sam) in enumerate(candidates):
        s_kf = motion_score(predicted, s_ref, stats, cfg)
        gate = distance_gate(predicted, stats, cfg)
        fused = (cfg.alpha_kf * s_kf + (1.0 - cfg.alpha_kf) * s_sam) * gate
        if best is None or fused > best.fused:
            best = Selection(j, fused, s_kf)
    assert best is not None
    if best.fused <= 0.0:
        return None
    return best
