"""Per-frame result records and their delimited file forms.

Floats are written with repr (shortest round-trip form), so parsing a
results file reproduces the in-memory stream exactly and identical runs
produce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .geometry import BoundingBox

RESULTS_HEADER = "frame,cx,cy,w,h,phase,s_sam,s_kf,mem_admit,selected"
TRUNCATION_PREFIX = "#truncated:"


@dataclass(frozen=True)
class FrameResult:
    frame: int
    box: BoundingBox
    phase: str
    s_sam: float
    s_kf: float
    mem_admit: bool
    selected: int  # candidate index, -1 when no candidate was chosen


def result_row(r: FrameResult) -> str:
    return ",".join(
        [
            str(r.frame),
            repr(float(r.box.cx)),
            repr(float(r.box.cy)),
            repr(float(r.box.w)),
            repr(float(r.box.h)),
            r.phase,
            repr(float(r.s_sam)),
            repr(float(r.s_kf)),
            "1" if r.mem_admit else "0",
            str(r.selected),
        ]
    )


def results_to_csv(results: list[FrameResult], truncation_note: str | None = None) -> str:
    lines = [RESULTS_HEADER]
    lines.extend(result_row(r) for r in results)
    if truncation_note is not None:
        lines.append(f"{TRUNCATION_PREFIX} {truncation_note}".replace("\n", " "))
    return "\n".join(lines) + "\n"


def write_results(
    path: str | Path, results: list[FrameResult], truncation_note: str | None = None
) -> None:
    Path(path).write_text(results_to_csv(results, truncation_note), encoding="utf-8", newline="\n")


def parse_results(text: str) -> tuple[list[FrameResult], str | None]:
    """Inverse of results_to_csv; returns the rows and any truncation note."""
    lines = text.splitlines()
    if not lines or lines[0] != RESULTS_HEADER:
        raise ValueError("missing or unexpected results header")
    results: list[FrameResult] = []
    note: str | None = None
    for line in lines[1:]:
        if not line:
            continue
        if line.startswith(TRUNCATION_PREFIX):
            note = line[len(TRUNCATION_PREFIX) :].strip()
            continue
        fields = line.split(",")
        if len(fields) != 10:
            raise ValueError(f"bad results row: {line!r}")
        results.append(
            FrameResult(
                frame=int(fields[0]),
                box=BoundingBox(float(fields[1]), float(fields[2]), float(fields[3]), float(fields[4])),
                phase=fields[5],
                s_sam=float(fields[6]),
                s_kf=float(fields[7]),
                mem_admit=fields[8] == "1",
                selected=int(fields[9]),
            )
        )
    return results, note


def read_results(path: str | Path) -> tuple[list[FrameResult], str | None]:
    return parse_results(Path(path).read_text(encoding="utf-8"))


# Ground-truth interchange uses the corner convention: one line per frame,
# "left,top,w,h".


def gt_to_text(boxes: list[BoundingBox]) -> str:
    return "\n".join(",".join(repr(v) for v in b.to_ltwh()) for b in boxes) + "\n"


def write_gt(path: str | Path, boxes: list[BoundingBox]) -> None:
    Path(path).write_text(gt_to_text(boxes), encoding="utf-8", newline="\n")


def parse_gt(text: str) -> list[BoundingBox]:
    boxes = []
    for line in text.splitlines():
        if not line.strip():
            continue
        left, top, w, h = (float(v) for v in line.split(","))
        boxes.append(BoundingBox.from_ltwh(left, top, w, h))
    return boxes


def read_gt(path: str | Path) -> list[BoundingBox]:
    return parse_gt(Path(path).read_text(encoding="utf-8"))
