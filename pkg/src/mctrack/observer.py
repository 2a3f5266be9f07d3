"""Per-frame candidate producers.

Three observers share one contract (`observe(frame_index, memory_admit_prev)
-> ObserverFrame`): the synthetic observer that degrades simulator ground
truth into noisy proposals, a transcript replayer for fixtures, and the
subprocess bridge client in `bridge`. Frames carry at most three candidate
masks; each candidate reports its affinity score (how target-like the mask
looks) and an object-existence score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .geometry import BoundingBox, MaskGrid, MaskStats, mask_stats, stats_from_box
from .simulator import Scenario, TrackTruth

MAX_CANDIDATES = 3

# s_obj is nearly inert (its default threshold is 0); model it as affinity
# minus a fixed offset, floored at zero.
OBJ_SCORE_OFFSET = 0.1

# Distractors are visually similar but not the prompted target, so their
# affinity sits below the target's by a fixed factor.
DISTRACTOR_AFFINITY_FACTOR = 0.65

FULL_COVER_EPS = 1e-9


class FrameOutOfRangeError(IndexError):
    """Raised when a frame index is outside the scenario."""


@dataclass(frozen=True)
class CandidateMask:
    """One observer proposal: stats are mandatory, the pixel mask optional."""

    stats: MaskStats
    s_sam: float
    s_obj: float = 0.0
    mask: MaskGrid | None = None


@dataclass(frozen=True)
class ObserverFrame:
    frame_index: int
    candidates: tuple[CandidateMask, ...]

    def __post_init__(self) -> None:
        if len(self.candidates) > MAX_CANDIDATES:
            raise ValueError(f"at most {MAX_CANDIDATES} candidates per frame")


class Observer(Protocol):
    def observe(self, frame_index: int, memory_admit_prev: bool = False) -> ObserverFrame: ...


@dataclass(frozen=True)
class NoiseProfile:
    """How the synthetic observer degrades ground truth into proposals."""

    box_jitter_sigma: float = 1.0
    affinity_mean_visible: float = 0.85
    affinity_mean_occluded: float = 0.08
    affinity_sigma: float = 0.08
    distractor_count: int = 2
    drop_prob_visible: float = 0.0
    occlusion_junk_prob: float = 0.3
    emit_masks: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.drop_prob_visible <= 1.0:
            raise ValueError("drop_prob_visible must be a probability")
        if not 0.0 <= self.occlusion_junk_prob <= 1.0:
            raise ValueError("occlusion_junk_prob must be a probability")
        if self.box_jitter_sigma < 0 or self.affinity_sigma < 0:
            raise ValueError("sigmas must be non-negative")

    @classmethod
    def noiseless(cls) -> "NoiseProfile":
        return cls(
            box_jitter_sigma=0.0,
            affinity_sigma=0.0,
            distractor_count=0,
            drop_prob_visible=0.0,
            occlusion_junk_prob=0.0,
        )


# Illumination presets: affinity falls and jitter grows as light degrades.
# "noiseless" keeps exact ground-truth boxes for oracle-grade runs.
PROFILES: dict[str, NoiseProfile] = {
    "day": NoiseProfile(box_jitter_sigma=1.0, affinity_mean_visible=0.85),
    "dusk": NoiseProfile(box_jitter_sigma=1.5, affinity_mean_visible=0.65),
    "night": NoiseProfile(box_jitter_sigma=2.2, affinity_mean_visible=0.45),
    "noiseless": NoiseProfile.noiseless(),
}


def _clip01(x: float) -> float:
    return min(1.0, max(0.0, x))


class SyntheticObserver:
    """Noisy candidate stream over a simulated scenario.

    Pure function of (scenario, frame, profile, seed): every frame reseeds
    its own generator, so observation order never matters and replays are
    bit-identical.
    """

    def __init__(self, scenario: Scenario, profile: NoiseProfile, seed: int = 0):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.scenario = scenario
        self.profile = profile
        self.seed = int(seed)

    def observe(self, frame_index: int, memory_admit_prev: bool = False) -> ObserverFrame:
        if not 0 <= frame_index < self.scenario.frames:
            raise FrameOutOfRangeError(
                f"frame {frame_index} outside scenario of {self.scenario.frames} frames"
            )
        rng = np.random.default_rng([self.seed, frame_index])
        prof = self.profile
        candidates: list[CandidateMask] = []

        target = self.scenario.target
        hidden = target.full_cover[frame_index] >= 1.0 - FULL_COVER_EPS
        if not hidden and rng.random() >= prof.drop_prob_visible:
            candidates.append(self._track_candidate(rng, target, frame_index, 1.0))
        elif hidden and rng.random() < prof.occlusion_junk_prob:
            junk = self._junk_candidate(rng, target.boxes[frame_index])
            if junk is not None:
                candidates.append(junk)

        for truth in self.scenario.distractors[: prof.distractor_count]:
            if truth.full_cover[frame_index] >= 1.0 - FULL_COVER_EPS:
                continue
            candidates.append(
                self._track_candidate(rng, truth, frame_index, DISTRACTOR_AFFINITY_FACTOR)
            )

        return ObserverFrame(frame_index, tuple(candidates[:MAX_CANDIDATES]))

    def _track_candidate(
        self, rng: np.random.Generator, truth: TrackTruth, frame: int, factor: float
    ) -> CandidateMask:
        box = self._jitter(rng, truth.boxes[frame])
        mean = self.profile.affinity_mean_visible * truth.visibility[frame] * factor
        return self._finish(rng, box, mean)

    def _junk_candidate(self, rng: np.random.Generator, gt_box: BoundingBox) -> CandidateMask | None:
        """Spurious low-confidence blob somewhere on the occluding structure."""
        occluders = [o.box for o in self.scenario.spec.occluders if o.kind == "full"]
        if not occluders:
            return None
        # the structure currently hiding the target, if identifiable
        covering = [
            o
            for o in occluders
            if o.left <= gt_box.cx <= o.right and o.top <= gt_box.cy <= o.bottom
        ]
        occ = covering[0] if covering else occluders[0]
        cx = rng.uniform(occ.left, occ.right)
        cy = rng.uniform(occ.top, occ.bottom)
        # Junk is scale-implausible: glare/shadow fragments or whole-structure
        # blobs, never target-sized.
        scale = rng.uniform(0.3, 0.6) if rng.random() < 0.5 else rng.uniform(1.6, 2.6)
        w = max(1.0, gt_box.w * scale)
        h = max(1.0, gt_box.h * scale)
        return self._finish(rng, BoundingBox(cx, cy, w, h), self.profile.affinity_mean_occluded)

    def _jitter(self, rng: np.random.Generator, box: BoundingBox) -> BoundingBox:
        sigma = self.profile.box_jitter_sigma
        if sigma == 0.0:
            return box
        dx, dy, dw, dh = rng.normal(0.0, 1.0, size=4)
        return BoundingBox(
            box.cx + sigma * dx,
            box.cy + sigma * dy,
            max(1.0, box.w + 0.5 * sigma * dw),
            max(1.0, box.h + 0.5 * sigma * dh),
        )

    def _finish(self, rng: np.random.Generator, box: BoundingBox, affinity_mean: float) -> CandidateMask:
        affinity = _clip01(affinity_mean + self.profile.affinity_sigma * rng.normal())
        s_obj = max(0.0, affinity - OBJ_SCORE_OFFSET)
        mask: MaskGrid | None = None
        if self.profile.emit_masks:
            mask = self._rasterize(box)
            stats = mask_stats(mask)
        else:
            stats = stats_from_box(box)
        return CandidateMask(stats=stats, s_sam=affinity, s_obj=s_obj, mask=mask)

    def _rasterize(self, box: BoundingBox) -> MaskGrid:
        width, height = self.scenario.spec.arena
        grid = np.zeros((height, width), dtype=bool)
        c0 = max(0, math.ceil(box.left))
        c1 = min(width - 1, math.floor(box.right))
        r0 = max(0, math.ceil(box.top))
        r1 = min(height - 1, math.floor(box.bottom))
        if c1 >= c0 and r1 >= r0:
            grid[r0 : r1 + 1, c0 : c1 + 1] = True
        else:
            # Degenerate sub-pixel box: keep at least the nearest pixel set.
            grid[
                min(height - 1, max(0, round(box.cy))),
                min(width - 1, max(0, round(box.cx))),
            ] = True
        return MaskGrid.from_array(grid)


# --- wire-schema candidates ---------------------------------------------------


def candidate_from_wire(obj: dict) -> CandidateMask:
    """Build a validated CandidateMask from one wire/transcript dict.

    Raises ValueError on any schema or consistency violation; transports
    wrap this into their own error types.
    """
    if not isinstance(obj, dict):
        raise ValueError("candidate must be an object")
    bbox = obj.get("bbox")
    if not (isinstance(bbox, (list, tuple)) and len(bbox) == 4):
        raise ValueError("candidate bbox must be [cx, cy, w, h]")
    cx, cy, w, h = (float(v) for v in bbox)
    if not (w > 0 and h > 0):
        raise ValueError(f"candidate box must have positive size, got w={w}, h={h}")
    box = BoundingBox(cx, cy, w, h)
    area = float(obj.get("area", 0.0))
    if not area > 0:
        raise ValueError(f"candidate area must be positive, got {area}")
    centroid = obj.get("centroid")
    if not (isinstance(centroid, (list, tuple)) and len(centroid) == 2):
        raise ValueError("candidate centroid must be [x, y]")
    mx, my = float(centroid[0]), float(centroid[1])
    if not (box.left <= mx <= box.right and box.top <= my <= box.bottom):
        raise ValueError("candidate centroid must lie inside its box")
    s_sam = float(obj.get("s_sam", 0.0))
    if not math.isfinite(s_sam):
        raise ValueError("s_sam must be finite")
    s_obj = float(obj.get("s_obj", 0.0))
    mask: MaskGrid | None = None
    if "rle" in obj and obj["rle"] is not None:
        mask = MaskGrid.from_text(str(obj["rle"]))
        derived = mask_stats(mask)
        if derived.area != area:
            raise ValueError(f"rle area {derived.area} disagrees with declared area {area}")
    return CandidateMask(
        stats=MaskStats(area=area, centroid=(mx, my), tight_box=box),
        s_sam=s_sam,
        s_obj=s_obj,
        mask=mask,
    )


def frame_from_wire(candidates: list, frame_index: int) -> ObserverFrame:
    if not isinstance(candidates, list):
        raise ValueError("candidates must be a list")
    if len(candidates) > MAX_CANDIDATES:
        raise ValueError(f"at most {MAX_CANDIDATES} candidates per frame, got {len(candidates)}")
    return ObserverFrame(frame_index, tuple(candidate_from_wire(c) for c in candidates))


class TranscriptObserver:
    """Replays a recorded transcript: header plus per-frame candidate lists."""

    def __init__(self, transcript: dict):
        header = transcript.get("header")
        if not isinstance(header, dict):
            raise ValueError("transcript needs a header object")
        self.width = int(header["width"])
        self.height = int(header["height"])
        self.prompt_box = BoundingBox(*header["prompt_box"])
        frames = transcript.get("frames")
        if not isinstance(frames, list):
            raise ValueError("transcript needs a frames array")
        self._frames = [frame_from_wire(f, i) for i, f in enumerate(frames)]

    @property
    def frames(self) -> int:
        return len(self._frames)

    def observe(self, frame_index: int, memory_admit_prev: bool = False) -> ObserverFrame:
        if not 0 <= frame_index < len(self._frames):
            raise FrameOutOfRangeError(f"frame {frame_index} outside transcript")
        return self._frames[frame_index]
