import { WireCandidate } from "../src/protocol.js";
import { Transcript } from "../src/transcript.js";

export async function* feed(lines: string[]): AsyncGenerator<string> {
  for (const line of lines) yield line;
}

export function collector(): { out: string[]; write: (line: string) => void } {
  const out: string[] = [];
  return { out, write: (line) => out.push(line) };
}

export function candidate(overrides: Partial<WireCandidate> = {}): WireCandidate {
  return {
    bbox: [50, 60, 10, 8],
    area: 80,
    centroid: [50, 60],
    s_sam: 0.7,
    s_obj: 0.6,
    ...overrides,
  };
}

export function initLine(width = 256, height = 256): string {
  return JSON.stringify({
    type: "init",
    proto: 1,
    width,
    height,
    prompt_box: [50, 60, 10, 8],
    sequence: "test",
  });
}

export function frameLine(index: number, admitPrev = false): string {
  return JSON.stringify({ type: "frame", index, memory_admit_prev: admitPrev });
}

export const closeLine = JSON.stringify({ type: "close" });

/** Tiny deterministic generator for fuzzed transcripts. */
export function lcg(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state * 1664525 + 1013904223) >>> 0;
    return state / 2 ** 32;
  };
}

export function randomTranscript(seed: number, frames = 20): Transcript {
  const rand = lcg(seed);
  const out: Transcript = {
    header: { width: 256, height: 256, prompt_box: [40, 40, 12, 10] },
    frames: [],
  };
  for (let t = 0; t < frames; t++) {
    const count = Math.floor(rand() * 4) % 4 === 3 ? 0 : Math.floor(rand() * 3) + 0;
    const frame: WireCandidate[] = [];
    for (let j = 0; j < count; j++) {
      const w = 4 + rand() * 20;
      const h = 4 + rand() * 20;
      const cx = 20 + rand() * 200;
      const cy = 20 + rand() * 200;
      frame.push({
        bbox: [cx, cy, w, h],
        area: w * h * (0.5 + rand() * 0.5),
        centroid: [cx + (rand() - 0.5) * w * 0.5, cy + (rand() - 0.5) * h * 0.5],
        s_sam: rand(),
        s_obj: rand() * 0.9,
      });
    }
    out.frames.push(frame);
  }
  return out;
}
