/**
 * Transcript files: a header plus per-frame candidate lists in the wire
 * schema. Frame indices are implicit (array order, contiguous from 0).
 */

import { readFileSync } from "node:fs";
import { SchemaError, WireCandidate, validateCandidateList } from "./protocol.js";

export interface TranscriptHeader {
  width: number;
  height: number;
  prompt_box: [number, number, number, number];
}

export interface Transcript {
  header: TranscriptHeader;
  frames: WireCandidate[][];
}

export function parseTranscript(value: unknown): Transcript {
  if (typeof value !== "object" || value === null) {
    throw new SchemaError("transcript must be an object");
  }
  const obj = value as Record<string, unknown>;
  const header = obj.header as Record<string, unknown> | undefined;
  if (
    header === undefined ||
    typeof header.width !== "number" ||
    typeof header.height !== "number" ||
    !Array.isArray(header.prompt_box) ||
    header.prompt_box.length !== 4
  ) {
    throw new SchemaError("transcript header needs width, height, prompt_box");
  }
  if (!Array.isArray(obj.frames)) {
    throw new SchemaError("transcript needs a frames array");
  }
  const frames = obj.frames.map((frame, index) => {
    try {
      return validateCandidateList(frame);
    } catch (err) {
      throw new SchemaError(`frame ${index}: ${(err as Error).message}`);
    }
  });
  return {
    header: {
      width: header.width,
      height: header.height,
      prompt_box: header.prompt_box as [number, number, number, number],
    },
    frames,
  };
}

export function loadTranscript(path: string): Transcript {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaError(`cannot read transcript ${path}: ${(err as Error).message}`);
  }
  return parseTranscript(raw);
}
