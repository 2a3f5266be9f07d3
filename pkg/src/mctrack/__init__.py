"""Motion-constrained single-object box tracker and its desk-scale harness.

A pluggable observer proposes up to three candidate masks per frame; a
constrained 9-state Kalman filter scores them for motion consistency; a
five-phase state machine decides what to output, when to update the
filter, and how to coast through occlusions; a memory gate records which
frames deserve to be remembered. A deterministic scenario simulator, a
synthetic observer, tracking metrics, and an ablation/sweep harness close
the loop.
"""

from .geometry import BoundingBox, EmptyMaskError, MaskGrid, MaskStats, center_distance, iou, mask_stats
from .memory import GateThresholds, MemoryBank, admit
from .metrics import EvalReport, evaluate, norm_precision, precision_at, success_auc
from .motion import (
    FilterState,
    KalmanModel,
    MotionConfig,
    distance_gate,
    fused_select,
    init_filter,
    motion_score,
    predict,
    update,
)
from .observer import CandidateMask, NoiseProfile, ObserverFrame, SyntheticObserver
from .results import FrameResult
from .simulator import Scenario, ScenarioSpec, builtin_suites, generate
from .state_machine import MachineConfig, MachineState, Phase
from .tracker import Tracker, TrackerConfig, VARIANTS

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "CandidateMask",
    "EmptyMaskError",
    "EvalReport",
    "FilterState",
    "FrameResult",
    "GateThresholds",
    "KalmanModel",
    "MachineConfig",
    "MachineState",
    "MaskGrid",
    "MaskStats",
    "MemoryBank",
    "MotionConfig",
    "NoiseProfile",
    "ObserverFrame",
    "Phase",
    "Scenario",
    "ScenarioSpec",
    "SyntheticObserver",
    "Tracker",
    "TrackerConfig",
    "VARIANTS",
    "admit",
    "builtin_suites",
    "center_distance",
    "distance_gate",
    "evaluate",
    "fused_select",
    "generate",
    "init_filter",
    "iou",
    "mask_stats",
    "motion_score",
    "norm_precision",
    "precision_at",
    "predict",
    "success_auc",
    "update",
]
