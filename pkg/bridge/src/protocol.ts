/**
 * Wire protocol shared with the tracker core: newline-delimited JSON over
 * stdio, one message per line.
 *
 *   -> {"type":"init","proto":1,"width":W,"height":H,"prompt_box":[cx,cy,w,h],"sequence":"<id>"}
 *   <- {"type":"ready","proto":1}
 *   -> {"type":"frame","index":t,"image":"<optional>","memory_admit_prev":true|false}
 *   <- {"type":"candidates","index":t,"candidates":[...]}
 *   -> {"type":"close"}
 *   <- {"type":"done"}
 *
 * Unknown fields are ignored; anything else is a protocol violation.
 */

export const PROTO_VERSION = 1;
export const MAX_CANDIDATES = 3;

export class SchemaError extends Error {}

export interface WireCandidate {
  bbox: [number, number, number, number];
  area: number;
  centroid: [number, number];
  s_sam: number;
  s_obj: number;
  rle?: string;
}

export interface InitMessage {
  type: "init";
  proto: number;
  width: number;
  height: number;
  prompt_box: [number, number, number, number];
  sequence: string;
}

export interface FrameMessage {
  type: "frame";
  index: number;
  memory_admit_prev: boolean;
}

export interface CloseMessage {
  type: "close";
}

export type ClientMessage = InitMessage | FrameMessage | CloseMessage;

function isFiniteNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

function numberQuad(value: unknown, what: string): [number, number, number, number] {
  if (!Array.isArray(value) || value.length !== 4 || !value.every(isFiniteNumber)) {
    throw new SchemaError(`${what} must be four finite numbers`);
  }
  return value as [number, number, number, number];
}

/** Total pixels and set pixels of an "W H r0 r1 ..." run-length text. */
export function rleStats(text: string): { total: number; area: number; width: number; height: number } {
  const fields = text.trim().split(/\s+/).map(Number);
  if (fields.length < 2 || fields.some((v) => !Number.isInteger(v) || v < 0)) {
    throw new SchemaError("rle must be non-negative integers: width height runs...");
  }
  const [width, height, ...runs] = fields;
  let total = 0;
  let area = 0;
  runs.forEach((run, i) => {
    total += run;
    if (i % 2 === 1) area += run;
  });
  if (total !== width * height) {
    throw new SchemaError(`rle runs sum to ${total}, expected ${width * height}`);
  }
  return { total, area, width, height };
}

export function validateCandidate(value: unknown): WireCandidate {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new SchemaError("candidate must be an object");
  }
  const obj = value as Record<string, unknown>;
  const bbox = numberQuad(obj.bbox, "candidate bbox");
  const [cx, cy, w, h] = bbox;
  if (!(w > 0 && h > 0)) {
    throw new SchemaError(`candidate box must have positive size, got w=${w}, h=${h}`);
  }
  if (!isFiniteNumber(obj.area) || !(obj.area > 0)) {
    throw new SchemaError(`candidate area must be positive, got ${obj.area}`);
  }
  const centroid = obj.centroid;
  if (!Array.isArray(centroid) || centroid.length !== 2 || !centroid.every(isFiniteNumber)) {
    throw new SchemaError("candidate centroid must be [x, y]");
  }
  const [mx, my] = centroid as [number, number];
  if (mx < cx - w / 2 || mx > cx + w / 2 || my < cy - h / 2 || my > cy + h / 2) {
    throw new SchemaError("candidate centroid must lie inside its box");
  }
  if (!isFiniteNumber(obj.s_sam)) {
    throw new SchemaError("candidate s_sam must be a finite number");
  }
  const sObj = obj.s_obj === undefined ? 0 : obj.s_obj;
  if (!isFiniteNumber(sObj)) {
    throw new SchemaError("candidate s_obj must be a finite number");
  }
  const candidate: WireCandidate = {
    bbox,
    area: obj.area,
    centroid: [mx, my],
    s_sam: obj.s_sam,
    s_obj: sObj,
  };
  if (obj.rle !== undefined && obj.rle !== null) {
    if (typeof obj.rle !== "string") throw new SchemaError("rle must be a string");
    const stats = rleStats(obj.rle);
    if (stats.area !== obj.area) {
      throw new SchemaError(`rle area ${stats.area} disagrees with declared area ${obj.area}`);
    }
    candidate.rle = obj.rle;
  }
  return candidate;
}

export function validateCandidateList(value: unknown): WireCandidate[] {
  if (!Array.isArray(value)) throw new SchemaError("candidates must be a list");
  if (value.length > MAX_CANDIDATES) {
    throw new SchemaError(`at most ${MAX_CANDIDATES} candidates per frame, got ${value.length}`);
  }
  return value.map(validateCandidate);
}

export function parseClientMessage(line: string): ClientMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    throw new SchemaError(`peer sent non-JSON line: ${JSON.stringify(line)}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new SchemaError("peer message must be an object");
  }
  const obj = raw as Record<string, unknown>;
  switch (obj.type) {
    case "init": {
      if (obj.proto !== PROTO_VERSION) {
        throw new SchemaError(`unsupported protocol version ${obj.proto}`);
      }
      if (!isFiniteNumber(obj.width) || !isFiniteNumber(obj.height)) {
        throw new SchemaError("init needs numeric width and height");
      }
      return {
        type: "init",
        proto: PROTO_VERSION,
        width: obj.width,
        height: obj.height,
        prompt_box: numberQuad(obj.prompt_box, "init prompt_box"),
        sequence: typeof obj.sequence === "string" ? obj.sequence : "",
      };
    }
    case "frame": {
      if (!isFiniteNumber(obj.index) || !Number.isInteger(obj.index) || obj.index < 0) {
        throw new SchemaError(`frame index must be a non-negative integer, got ${obj.index}`);
      }
      return {
        type: "frame",
        index: obj.index,
        memory_admit_prev: obj.memory_admit_prev === true,
      };
    }
    case "close":
      return { type: "close" };
    default:
      throw new SchemaError(`unknown message type ${JSON.stringify(obj.type)}`);
  }
}

export function readyLine(): string {
  return JSON.stringify({ type: "ready", proto: PROTO_VERSION });
}

export function candidatesLine(index: number, candidates: WireCandidate[]): string {
  return JSON.stringify({ type: "candidates", index, candidates });
}

export function doneLine(): string {
  return JSON.stringify({ type: "done" });
}
