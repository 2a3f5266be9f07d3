/**
 * Boundary for attaching a real segmentation model.
 *
 * An adapter produces per-frame candidate masks with affinity and
 * object-existence scores; this module converts them to wire candidates
 * (tight box, area, centroid, optional run-length mask) and forwards the
 * per-frame memory-admission flag to the adapter's memory hook. The
 * scripted adapter is the reference implementation used by the tests;
 * wiring in actual model inference is deliberately out of scope here.
 */

import { InitMessage, WireCandidate, rleStats, validateCandidate } from "./protocol.js";
import { CandidateSource } from "./server.js";

export interface AdapterPrompt {
  width: number;
  height: number;
  promptBox: [number, number, number, number];
  sequence: string;
}

export interface AdapterMask {
  /** Tight box, center-based [cx, cy, w, h]. */
  bbox: [number, number, number, number];
  sSam: number;
  sObj: number;
  /** Pixel count; defaults to the box area for filled-box masks. */
  area?: number;
  /** Mask centroid; defaults to the box center. */
  centroid?: [number, number];
  /** Optional "W H r0 r1 ..." run-length mask. */
  rle?: string;
}

export interface ModelAdapter {
  init(prompt: AdapterPrompt): void;
  /** Candidate masks for one frame, at most three. */
  segment(frameIndex: number, memoryAdmitPrev: boolean): AdapterMask[];
}

export function toWireCandidate(mask: AdapterMask): WireCandidate {
  const [cx, cy, w, h] = mask.bbox;
  const candidate: Record<string, unknown> = {
    bbox: mask.bbox,
    area: mask.area ?? (mask.rle !== undefined ? rleStats(mask.rle).area : w * h),
    centroid: mask.centroid ?? [cx, cy],
    s_sam: mask.sSam,
    s_obj: mask.sObj,
  };
  if (mask.rle !== undefined) candidate.rle = mask.rle;
  return validateCandidate(candidate);
}

export class AdapterSource implements CandidateSource {
  constructor(private readonly adapter: ModelAdapter) {}

  begin(init: InitMessage): void {
    this.adapter.init({
      width: init.width,
      height: init.height,
      promptBox: init.prompt_box,
      sequence: init.sequence,
    });
  }

  candidates(index: number, memoryAdmitPrev: boolean): WireCandidate[] {
    return this.adapter.segment(index, memoryAdmitPrev).map(toWireCandidate);
  }
}

/** Replays scripted masks; records the memory flags it was handed. */
export class ScriptedAdapter implements ModelAdapter {
  prompt: AdapterPrompt | null = null;
  readonly memoryFlags: boolean[] = [];

  constructor(private readonly frames: AdapterMask[][]) {}

  init(prompt: AdapterPrompt): void {
    this.prompt = prompt;
  }

  segment(frameIndex: number, memoryAdmitPrev: boolean): AdapterMask[] {
    if (frameIndex >= this.frames.length) {
      throw new RangeError(`frame ${frameIndex} beyond script of ${this.frames.length} frames`);
    }
    this.memoryFlags.push(memoryAdmitPrev);
    return this.frames[frameIndex];
  }
}
