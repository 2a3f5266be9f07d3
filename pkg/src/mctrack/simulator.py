"""Deterministic scenario generation: rigid targets, occluders, distractors.

Trajectories are piecewise-linear and integrated with one fixed step per
frame; all stochasticity lives in the observer, so ground truth is exact
and metric oracles can be computed directly. Builtin suites use dyadic
velocities so the occlusion-window edge comparisons are exact in floats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import BoundingBox


class SpecError(ValueError):
    """Raised for scenario specs that cannot be generated."""


@dataclass(frozen=True)
class MotionSegment:
    """Velocity (px/frame) taking effect at start_frame."""

    start_frame: int
    vx: float
    vy: float


@dataclass(frozen=True)
class TrackSpec:
    initial_box: BoundingBox
    segments: tuple[MotionSegment, ...] = ()


@dataclass(frozen=True)
class Occluder:
    """Opaque ("full") occluders hide the target; "partial" ones only degrade it."""

    box: BoundingBox
    kind: str = "full"

    def __post_init__(self) -> None:
        if self.kind not in ("full", "partial"):
            raise SpecError(f"occluder kind must be full|partial, got {self.kind!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    frames: int
    arena: tuple[int, int]
    target: TrackSpec
    occluders: tuple[Occluder, ...] = ()
    distractors: tuple[TrackSpec, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.frames < 1:
            raise SpecError(f"frames must be >= 1, got {self.frames}")
        box = self.target.initial_box
        w, h = self.arena
        if box.left < 0 or box.top < 0 or box.right > w or box.bottom > h:
            raise SpecError("target box must start inside the arena")
        for track in (self.target, *self.distractors):
            starts = [s.start_frame for s in track.segments]
            if starts != sorted(set(starts)):
                raise SpecError("segment start frames must be strictly increasing")


@dataclass(frozen=True)
class TrackTruth:
    """Per-frame boxes plus occlusion fractions for one track."""

    boxes: tuple[BoundingBox, ...]
    visibility: tuple[float, ...]
    full_cover: tuple[float, ...]


@dataclass(frozen=True)
class Scenario:
    spec: ScenarioSpec
    target: TrackTruth
    distractors: tuple[TrackTruth, ...] = field(default_factory=tuple)

    @property
    def frames(self) -> int:
        return self.spec.frames


def _covered_fraction(target: BoundingBox, boxes: list[BoundingBox]) -> float:
    """Fraction of the target covered by the union of the given boxes."""
    clipped = []
    xs = {target.left, target.right}
    ys = {target.top, target.bottom}
    for b in boxes:
        left = max(b.left, target.left)
        right = min(b.right, target.right)
        top = max(b.top, target.top)
        bottom = min(b.bottom, target.bottom)
        if right > left and bottom > top:
            clipped.append((left, top, right, bottom))
            xs.update((left, right))
            ys.update((top, bottom))
    if not clipped:
        return 0.0
    xs_sorted = sorted(xs)
    ys_sorted = sorted(ys)
    covered = 0.0
    for x0, x1 in zip(xs_sorted, xs_sorted[1:]):
        cx = (x0 + x1) / 2.0
        for y0, y1 in zip(ys_sorted, ys_sorted[1:]):
            cy = (y0 + y1) / 2.0
            if any(l <= cx <= r and t <= cy <= b for (l, t, r, b) in clipped):
                covered += (x1 - x0) * (y1 - y0)
    return covered / target.area()


def _integrate(track: TrackSpec, frames: int) -> tuple[BoundingBox, ...]:
    segments = sorted(track.segments, key=lambda s: s.start_frame)
    boxes = [track.initial_box]
    cx, cy = track.initial_box.cx, track.initial_box.cy
    w, h = track.initial_box.w, track.initial_box.h
    seg_idx = -1
    vx = vy = 0.0
    for t in range(frames - 1):
        while seg_idx + 1 < len(segments) and segments[seg_idx + 1].start_frame <= t:
            seg_idx += 1
            vx, vy = segments[seg_idx].vx, segments[seg_idx].vy
        cx += vx
        cy += vy
        boxes.append(BoundingBox(cx, cy, w, h))
    return tuple(boxes)


def _truth(track: TrackSpec, spec: ScenarioSpec) -> TrackTruth:
    boxes = _integrate(track, spec.frames)
    all_occ = [o.box for o in spec.occluders]
    full_occ = [o.box for o in spec.occluders if o.kind == "full"]
    visibility = tuple(1.0 - _covered_fraction(b, all_occ) for b in boxes)
    full_cover = tuple(_covered_fraction(b, full_occ) for b in boxes)
    return TrackTruth(boxes=boxes, visibility=visibility, full_cover=full_cover)


def generate(spec: ScenarioSpec) -> Scenario:
    """Expand a spec into per-frame ground truth; deterministic and pure."""
    return Scenario(
        spec=spec,
        target=_truth(spec.target, spec),
        distractors=tuple(_truth(d, spec) for d in spec.distractors),
    )


# --- builtin suites ---------------------------------------------------------

_DIRS = {"+x": (1.0, 0.0), "-x": (-1.0, 0.0), "+y": (0.0, 1.0), "-y": (0.0, -1.0)}


def _fit_arena(extent: float) -> int:
    return max(256, 16 * math.ceil((extent + 16.0) / 16.0))


def _axis_layout(direction: str, speed: float, frames: int, margin: float = 24.0):
    """Start center and arena so a straight run stays inside with margin."""
    dx, dy = _DIRS[direction]
    horizontal = dx != 0.0
    w, h = (18.0, 12.0) if horizontal else (12.0, 18.0)
    travel = speed * (frames - 1)
    main_extent = margin * 2 + travel
    arena_main = _fit_arena(main_extent)
    start_main = margin if (dx + dy) > 0 else arena_main - margin
    cross = 128.0
    if horizontal:
        arena = (arena_main, 256)
        start = (start_main, cross)
    else:
        arena = (256, arena_main)
        start = (cross, start_main)
    vel = (dx * speed, dy * speed)
    return start, (w, h), vel, arena


def linear_clear_spec(
    speed: float = 2.0, direction: str = "+x", frames: int = 100
) -> ScenarioSpec:
    """Unoccluded straight run."""
    start, (w, h), vel, arena = _axis_layout(direction, speed, frames)
    return ScenarioSpec(
        frames=frames,
        arena=arena,
        target=TrackSpec(BoundingBox(*start, w, h), (MotionSegment(0, *vel),)),
    )


def _window_occluder(
    start: tuple[float, float],
    vel: tuple[float, float],
    size: tuple[float, float],
    t0: int,
    t1: int,
) -> Occluder:
    """Opaque occluder fully covering a straight-moving target on [t0, t1]."""
    w, h = size

    def pos(t: int) -> tuple[float, float]:
        return (start[0] + vel[0] * t, start[1] + vel[1] * t)

    horizontal = vel[0] != 0.0
    half_main = w / 2.0 if horizontal else h / 2.0
    m0 = pos(t0)[0] if horizontal else pos(t0)[1]
    m1 = pos(t1)[0] if horizontal else pos(t1)[1]
    lo = min(m0, m1) - half_main
    hi = max(m0, m1) + half_main
    cross = start[1] if horizontal else start[0]
    cross_half = (h if horizontal else w) / 2.0 + 6.0
    if horizontal:
        box = BoundingBox((lo + hi) / 2.0, cross, hi - lo, 2 * cross_half)
    else:
        box = BoundingBox(cross, (lo + hi) / 2.0, 2 * cross_half, hi - lo)
    return Occluder(box, "full")


def _straight_occluded_spec(
    speed: float, direction: str, frames: int, windows: tuple[tuple[int, int], ...]
) -> ScenarioSpec:
    start, size, vel, arena = _axis_layout(direction, speed, frames)
    occluders = []
    for occlusion_start, occlusion_len in windows:
        if occlusion_start < 1 or occlusion_start + occlusion_len >= frames:
            raise SpecError("occlusion window must lie strictly inside the sequence")
        occluders.append(
            _window_occluder(start, vel, size, occlusion_start, occlusion_start + occlusion_len - 1)
        )
    return ScenarioSpec(
        frames=frames,
        arena=arena,
        target=TrackSpec(BoundingBox(*start, *size), (MotionSegment(0, *vel),)),
        occluders=tuple(occluders),
    )


def occlusion_bridge_spec(
    speed: float = 2.0,
    direction: str = "+x",
    frames: int = 100,
    occlusion_start: int = 40,
    occlusion_len: int = 20,
) -> ScenarioSpec:
    """Straight run through an opaque occluder covering exactly the given window."""
    return _straight_occluded_spec(speed, direction, frames, ((occlusion_start, occlusion_len),))


def occlusion_double_spec(
    speed: float = 2.0, direction: str = "+x", frames: int = 100
) -> ScenarioSpec:
    """Two separated 12-frame blackouts; recovery must survive a repeat."""
    return _straight_occluded_spec(speed, direction, frames, ((30, 12), (65, 12)))


def occlusion_long_spec(
    speed: float = 2.0, direction: str = "+x", frames: int = 100
) -> ScenarioSpec:
    """A single prolonged 30-frame blackout; sustained extrapolation."""
    return _straight_occluded_spec(speed, direction, frames, ((35, 30),))


def distractor_cross_spec(
    speed: float = 2.0, turn_frame: int = 4, frames: int = 100
) -> ScenarioSpec:
    """Overlapping distractor keeps the target's original heading.

    The target starts just ahead of a same-sized distractor, both moving +x;
    at turn_frame the target veers diagonally while the distractor stays on
    the straight path a linear prediction extrapolates. Appearance and
    motion evidence disagree from that frame on.
    """
    w, h = 18.0, 12.0
    start = (40.0, 96.0)
    turn_vel = (0.75 * speed, 0.75 * speed)
    x_turn = start[0] + speed * turn_frame
    end_x = x_turn + turn_vel[0] * (frames - 1 - turn_frame)
    end_y = start[1] + turn_vel[1] * (frames - 1 - turn_frame)
    distractor_end_x = start[0] - 4.0 + speed * (frames - 1)
    arena = (
        _fit_arena(max(end_x, distractor_end_x) + w),
        _fit_arena(end_y + h),
    )
    target = TrackSpec(
        BoundingBox(*start, w, h),
        (MotionSegment(0, speed, 0.0), MotionSegment(turn_frame, *turn_vel)),
    )
    distractor = TrackSpec(
        BoundingBox(start[0] - 4.0, start[1], w, h),
        (MotionSegment(0, speed, 0.0),),
    )
    return ScenarioSpec(
        frames=frames,
        arena=arena,
        target=target,
        distractors=(distractor,),
    )


def turn_under_occlusion_spec(
    speed: float = 2.5, turn_frame: int = 50, frames: int = 100
) -> ScenarioSpec:
    """Target turns 90 degrees while fully hidden; linear extrapolation must fail."""
    w, h = 18.0, 12.0
    start = (30.0, 60.0)
    occ_t0, occ_t1 = turn_frame - 8, turn_frame + 8

    def pos(t: int) -> tuple[float, float]:
        if t <= turn_frame:
            return (start[0] + speed * t, start[1])
        return (start[0] + speed * turn_frame, start[1] + speed * (t - turn_frame))

    x0 = pos(occ_t0)[0] - w / 2.0
    x1 = pos(turn_frame)[0] + w / 2.0
    y0 = start[1] - h / 2.0
    y1 = pos(occ_t1)[1] + h / 2.0
    occ_box = BoundingBox((x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0)
    arena_w = _fit_arena(pos(turn_frame)[0] + w)
    arena_h = _fit_arena(pos(frames - 1)[1] + h)
    return ScenarioSpec(
        frames=frames,
        arena=(arena_w, arena_h),
        target=TrackSpec(
            BoundingBox(*start, w, h),
            (MotionSegment(0, speed, 0.0), MotionSegment(turn_frame, 0.0, speed)),
        ),
        occluders=(Occluder(occ_box, "full"),),
    )


# Evaluation suites: the "combined builtin suites" of the ablation harness.
SUITE_NAMES = (
    "linear_clear",
    "occlusion_bridge",
    "occlusion_double",
    "occlusion_long",
    "distractor_cross",
    "turn_under_occlusion",
)

_SPEED_CYCLE = (2.0, 1.5, 2.5, 1.75, 2.25)
_DIR_CYCLE = ("+x", "-x", "+y", "-y")


def demo_1024_spec(speed: float = 6.0, frames: int = 100) -> ScenarioSpec:
    """Full-resolution demo: 1024x1024 arena, fast target, one bridge crossing."""
    w, h = 40.0, 24.0
    start = (80.0, 512.0)
    vel = (speed, 0.0)
    occluder = _window_occluder(start, vel, (w, h), 40, 59)
    return ScenarioSpec(
        frames=frames,
        arena=(1024, 1024),
        target=TrackSpec(BoundingBox(*start, w, h), (MotionSegment(0, *vel),)),
        occluders=(occluder,),
    )


def builtin_suites() -> dict[str, ScenarioSpec]:
    """Canonical spec per builtin suite name, plus the full-resolution demo."""
    return {
        "linear_clear": linear_clear_spec(),
        "occlusion_bridge": occlusion_bridge_spec(),
        "occlusion_double": occlusion_double_spec(),
        "occlusion_long": occlusion_long_spec(),
        "distractor_cross": distractor_cross_spec(),
        "turn_under_occlusion": turn_under_occlusion_spec(),
        "demo_1024": demo_1024_spec(),
    }


def suite_variant(name: str, index: int) -> ScenarioSpec:
    """Deterministic geometric variant of a builtin suite.

    Variants cycle speed (and direction where the geometry allows) so a
    multi-sequence run is not thirty copies of one trajectory.
    """
    speed = _SPEED_CYCLE[index % len(_SPEED_CYCLE)]
    direction = _DIR_CYCLE[(index // len(_SPEED_CYCLE)) % len(_DIR_CYCLE)]
    if name == "linear_clear":
        return linear_clear_spec(speed=speed, direction=direction)
    if name == "occlusion_bridge":
        return occlusion_bridge_spec(speed=speed, direction=direction)
    if name == "occlusion_double":
        return occlusion_double_spec(speed=speed, direction=direction)
    if name == "occlusion_long":
        return occlusion_long_spec(speed=speed, direction=direction)
    if name == "distractor_cross":
        return distractor_cross_spec(speed=speed)
    if name == "turn_under_occlusion":
        return turn_under_occlusion_spec(speed=speed)
    if name == "demo_1024":
        return demo_1024_spec(speed=3.0 * speed)
    raise SpecError(f"unknown suite {name!r}")


# --- spec/scenario (de)serialization ----------------------------------------


def _box_to_list(box: BoundingBox) -> list[float]:
    return [box.cx, box.cy, box.w, box.h]


def _track_to_dict(track: TrackSpec) -> dict:
    return {
        "initial_box": _box_to_list(track.initial_box),
        "segments": [[s.start_frame, s.vx, s.vy] for s in track.segments],
    }


def _track_from_dict(data: dict) -> TrackSpec:
    return TrackSpec(
        BoundingBox(*data["initial_box"]),
        tuple(MotionSegment(int(s[0]), float(s[1]), float(s[2])) for s in data.get("segments", [])),
    )


def spec_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "frames": spec.frames,
        "arena": list(spec.arena),
        "seed": spec.seed,
        "target": _track_to_dict(spec.target),
        "occluders": [{"box": _box_to_list(o.box), "kind": o.kind} for o in spec.occluders],
        "distractors": [_track_to_dict(d) for d in spec.distractors],
    }


def spec_from_dict(data: dict) -> ScenarioSpec:
    return ScenarioSpec(
        frames=int(data["frames"]),
        arena=(int(data["arena"][0]), int(data["arena"][1])),
        target=_track_from_dict(data["target"]),
        occluders=tuple(
            Occluder(BoundingBox(*o["box"]), o.get("kind", "full"))
            for o in data.get("occluders", [])
        ),
        distractors=tuple(_track_from_dict(d) for d in data.get("distractors", [])),
        seed=int(data.get("seed", 0)),
    )


def load_spec(path: str | Path) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


def save_spec(spec: ScenarioSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n", encoding="utf-8")


def scenario_to_dict(scenario: Scenario) -> dict:
    def truth(t: TrackTruth) -> dict:
        return {
            "boxes": [_box_to_list(b) for b in t.boxes],
            "visibility": list(t.visibility),
            "full_cover": list(t.full_cover),
        }

    return {
        "spec": spec_to_dict(scenario.spec),
        "target": truth(scenario.target),
        "distractors": [truth(d) for d in scenario.distractors],
    }


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(scenario_to_dict(scenario), indent=2) + "\n", encoding="utf-8"
    )
