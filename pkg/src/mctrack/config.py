"""Config file loading: one TOML or JSON document, parser picked by extension.

Every tracker hyperparameter is a named key with its published default, so
an empty document reproduces the reference configuration. Noise matrices
accept diagonal-only shorthand.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - environment dependent
    import tomli as tomllib

from .memory import GateThresholds
from .motion import (
    DEFAULT_P0_DIAG,
    DEFAULT_Q_DIAG,
    DEFAULT_R_DIAG,
    KalmanModel,
    MotionConfig,
)
from .state_machine import MachineConfig
from .tracker import TrackerConfig


@dataclass
class RunConfig:
    """Tracker configuration plus run-level options."""

    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    variant: str = "full"
    seed: int = 0
    profile: str = "day"
    observer: str = "synthetic"  # "synthetic" or "bridge:<command line>"


def _load_document(path: str | Path) -> dict:
    path = Path(path)
    if path.suffix.lower() == ".json":
        return json.loads(path.read_text(encoding="utf-8"))
    if path.suffix.lower() == ".toml":
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    raise ValueError(f"config must be .toml or .json, got {path.suffix!r}")


def _machine_config(data: dict) -> MachineConfig:
    return MachineConfig(
        tau_h=float(data.get("tau_h", 0.3)),
        tau_m=float(data.get("tau_m", 0.0)),
        tau_kf=float(data.get("tau_kf", 0.0)),
        stable_after=int(data.get("t_f", 12)),
        reset_after=int(data.get("t_m", 5)),
        gated_recovery=bool(data.get("gated_recovery", False)),
    )


def _motion_config(data: dict) -> MotionConfig:
    d_max = data.get("d_max", "auto")
    return MotionConfig(
        alpha_kf=float(data.get("alpha_kf", 0.2)),
        deform_range=tuple(float(v) for v in data.get("deform_range", (0.5, 2.0))),
        d_max=None if d_max == "auto" else float(d_max),
        tau_kf=float(data.get("tau_kf", 0.0)),
    )


def _gate_thresholds(data: dict) -> GateThresholds:
    return GateThresholds(
        tau_mask=float(data.get("tau_mask", 0.5)),
        tau_obj=float(data.get("tau_obj", 0.0)),
        tau_kf=float(data.get("tau_kf", 0.0)),
    )


def _kalman_model(data: dict) -> KalmanModel:
    return KalmanModel.from_noise(
        dt=float(data.get("dt", 1.0)),
        q_diag=[float(v) for v in data.get("q_diag", DEFAULT_Q_DIAG)],
        r_diag=[float(v) for v in data.get("r_diag", DEFAULT_R_DIAG)],
        p0_diag=[float(v) for v in data.get("p0_diag", DEFAULT_P0_DIAG)],
    )


def run_config_from_dict(data: dict) -> RunConfig:
    tracker = TrackerConfig(
        machine=_machine_config(data.get("state_machine", {})),
        motion=_motion_config(data.get("motion", {})),
        gate=_gate_thresholds(data.get("memory", {})),
        model=_kalman_model(data.get("motion", {}).get("noise", {})),
        memory_capacity=int(data.get("memory", {}).get("capacity", 16)),
    )
    run = data.get("run", {})
    observer = data.get("observer", {})
    return RunConfig(
        tracker=tracker,
        variant=str(run.get("variant", "full")),
        seed=int(run.get("seed", 0)),
        profile=str(observer.get("profile", "day")),
        observer=str(observer.get("source", "synthetic")),
    )


def load_run_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return run_config_from_dict(_load_document(path))
