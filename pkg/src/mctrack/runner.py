"""Run orchestration: seeded suite expansion, tracking loops, ablation, sweeps.

Sequences are fully determined by (suite, index, base_seed, profile), and
ablation runs reuse identical sequence definitions across variants so the
comparisons are paired.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

from .geometry import BoundingBox
from .metrics import EvalReport, evaluate
from .observer import PROFILES, Observer, SyntheticObserver
from .results import FrameResult
from .simulator import Scenario, ScenarioSpec, generate, suite_variant
from .tracker import Tracker, TrackerConfig, VARIANTS

logger = logging.getLogger(__name__)

PROFILE_CYCLE = ("day", "dusk", "night")
SWEEPABLE_PARAMS = ("alpha_kf", "tau_h")


class TrackingError(RuntimeError):
    """A sequence failed mid-run; carries the frame index and partial results."""

    def __init__(self, frame: int, partial: list[FrameResult], cause: BaseException):
        super().__init__(f"frame {frame}: {cause}")
        self.frame = frame
        self.partial = partial
        self.cause = cause


@dataclass(frozen=True)
class SequenceDef:
    name: str
    spec: ScenarioSpec
    profile: str
    seed: int
    suite: str


@dataclass(frozen=True)
class SequenceRun:
    definition: SequenceDef
    results: list[FrameResult]
    gt: list[BoundingBox]

    def output_boxes(self) -> list[BoundingBox]:
        return [r.box for r in self.results]

    def report(self) -> EvalReport:
        return evaluate(self.output_boxes(), self.gt)


def expand_suite(
    suite: str, n: int, base_seed: int = 0, profile: str = "day"
) -> list[SequenceDef]:
    """n seeded sequence definitions; profile "cycle" rotates day/dusk/night."""
    defs = []
    for i in range(n):
        prof = PROFILE_CYCLE[i % len(PROFILE_CYCLE)] if profile == "cycle" else profile
        defs.append(
            SequenceDef(
                name=f"{suite}_{i:03d}_{prof}",
                spec=suite_variant(suite, i),
                profile=prof,
                seed=base_seed + i,
                suite=suite,
            )
        )
    return defs


def track_frames(
    observer: Observer,
    prompt_box: BoundingBox,
    n_frames: int,
    config: TrackerConfig | None = None,
    variant: str = "full",
) -> list[FrameResult]:
    """Drive one tracker over an observer; failures carry partial results."""
    tracker = Tracker(prompt_box, config, variant)
    results: list[FrameResult] = []
    admit_prev = False
    for t in range(n_frames):
        try:
            frame = observer.observe(t, memory_admit_prev=admit_prev)
            result = tracker.step(frame)
        except Exception as exc:  # surfaced with the frame index, partials kept
            raise TrackingError(t, results, exc) from exc
        results.append(result)
        admit_prev = result.mem_admit
    return results


def run_sequence(
    seq: SequenceDef, config: TrackerConfig | None = None, variant: str = "full"
) -> SequenceRun:
    scenario = generate(seq.spec)
    observer = SyntheticObserver(scenario, PROFILES[seq.profile], seq.seed)
    results = track_frames(
        observer, scenario.target.boxes[0], scenario.frames, config, variant
    )
    return SequenceRun(seq, results, list(scenario.target.boxes))


def run_suite(
    suite: str,
    n: int,
    base_seed: int = 0,
    config: TrackerConfig | None = None,
    variant: str = "full",
    profile: str = "day",
) -> list[SequenceRun]:
    runs = []
    for seq in expand_suite(suite, n, base_seed, profile):
        logger.info("tracking %s (variant=%s)", seq.name, variant)
        runs.append(run_sequence(seq, config, variant))
    return runs


def mean_metrics(runs: Sequence[SequenceRun]) -> dict:
    reports = [r.report() for r in runs]
    return {
        "auc": sum(r.auc for r in reports) / len(reports),
        "p20": sum(r.precision_at_20 for r in reports) / len(reports),
        "pnorm": sum(r.p_norm for r in reports) / len(reports),
        "n_seq": len(reports),
        "n_frames": sum(r.n_frames for r in reports),
    }


def ablate(
    suites: Sequence[str],
    n_per_suite: int,
    base_seed: int = 0,
    config: TrackerConfig | None = None,
    profile: str = "cycle",
    variants: Sequence[str] = VARIANTS,
) -> list[dict]:
    """Mean metrics per variant over identical paired sequences."""
    defs = [
        seq
        for suite in suites
        for seq in expand_suite(suite, n_per_suite, base_seed, profile)
    ]
    rows = []
    for variant in variants:
        runs = []
        for seq in defs:
            logger.info("ablate %s on %s", variant, seq.name)
            runs.append(run_sequence(seq, config, variant))
        rows.append({"variant": variant, **mean_metrics(runs)})
    return rows


def config_with(config: TrackerConfig | None, param: str, value: float) -> TrackerConfig:
    config = config or TrackerConfig()
    if param == "alpha_kf":
        return replace(config, motion=replace(config.motion, alpha_kf=value))
    if param == "tau_h":
        return replace(config, machine=replace(config.machine, tau_h=value))
    raise ValueError(f"unknown sweep parameter {param!r}; expected one of {SWEEPABLE_PARAMS}")


def sweep(
    param: str,
    values: Sequence[float],
    suite: str,
    n: int,
    base_seed: int = 0,
    config: TrackerConfig | None = None,
    variant: str = "full",
    profile: str = "day",
) -> list[dict]:
    """Mean AUC / precision per parameter value over a fixed seeded suite."""
    if len(values) < 1:
        raise ValueError("sweep needs at least one value")
    defs = expand_suite(suite, n, base_seed, profile)
    rows = []
    for value in values:
        cfg = config_with(config, param, value)
        runs = []
        failed = None
        for seq in defs:
            try:
                runs.append(run_sequence(seq, cfg, variant))
            except TrackingError as exc:  # recorded per-cell, sweep continues
                failed = str(exc)
                break
        if failed is not None:
            rows.append({"value": value, "auc": float("nan"), "p20": float("nan"), "error": failed})
        else:
            metrics = mean_metrics(runs)
            rows.append({"value": value, "auc": metrics["auc"], "p20": metrics["p20"]})
    return rows
