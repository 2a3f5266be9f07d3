"""Memory admission gate and the capped, reverse-chronological memory bank.

The bank is advisory bookkeeping: the tracker records which frames passed
the three-score gate and forwards the per-frame admission flag to the
observer (a learned backend keeps its actual feature memory on its side
of the wire).
"""

from __future__ import annotations

from dataclasses import dataclass, field


class OutOfOrderFrameError(ValueError):
    """Raised when a pushed frame index does not exceed all stored ones."""


@dataclass(frozen=True)
class GateThresholds:
    tau_mask: float = 0.5
    tau_obj: float = 0.0
    tau_kf: float = 0.0


def admit(s_mask: float, s_obj: float, s_kf: float, th: GateThresholds) -> bool:
    """True iff all three scores strictly exceed their thresholds."""
    return s_mask > th.tau_mask and s_obj > th.tau_obj and s_kf > th.tau_kf


@dataclass(frozen=True)
class MemoryEntry:
    frame: int
    s_mask: float
    s_obj: float
    s_kf: float


@dataclass(frozen=True)
class MemoryBank:
    """At most `capacity` admitted frames, newest first."""

    capacity: int = 16
    entries: tuple[MemoryEntry, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {self.capacity}")

    def push(self, frame: int, s_mask: float, s_obj: float, s_kf: float) -> "MemoryBank":
        """Prepend an admitted frame, evicting the oldest past capacity."""
        if self.entries and frame <= self.entries[0].frame:
            raise OutOfOrderFrameError(
                f"frame {frame} not newer than stored frame {self.entries[0].frame}"
            )
        entry = MemoryEntry(frame, s_mask, s_obj, s_kf)
        return MemoryBank(self.capacity, (entry, *self.entries)[: self.capacity])

    def frames(self) -> tuple[int, ...]:
        return tuple(e.frame for e in self.entries)
