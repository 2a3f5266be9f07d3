/**
 * The request/response loop, written against plain line streams so tests
 * can drive it in-memory. Peer misbehavior (bad JSON, frame before init,
 * non-consecutive indices, out-of-range frames) raises ProtocolViolation;
 * the CLI turns that into a stderr diagnostic and a nonzero exit.
 */

import {
  InitMessage,
  WireCandidate,
  candidatesLine,
  doneLine,
  parseClientMessage,
  readyLine,
} from "./protocol.js";

export class ProtocolViolation extends Error {}

export interface CandidateSource {
  /** Called once on init; may validate the prompt against its own header. */
  begin(init: InitMessage): void;
  /** Candidates for one frame; throws RangeError when index is out of range. */
  candidates(index: number, memoryAdmitPrev: boolean): WireCandidate[];
}

export async function serveLines(
  source: CandidateSource,
  lines: AsyncIterable<string>,
  write: (line: string) => void,
): Promise<void> {
  let initialized = false;
  let nextIndex = 0;
  for await (const line of lines) {
    if (line.trim() === "") continue;
    let message;
    try {
      message = parseClientMessage(line);
    } catch (err) {
      throw new ProtocolViolation((err as Error).message);
    }
    switch (message.type) {
      case "init": {
        if (initialized) throw new ProtocolViolation("duplicate init");
        source.begin(message);
        initialized = true;
        write(readyLine());
        break;
      }
      case "frame": {
        if (!initialized) throw new ProtocolViolation("frame before init");
        if (message.index !== nextIndex) {
          throw new ProtocolViolation(
            `frame indices must increase by 1; expected ${nextIndex}, got ${message.index}`,
          );
        }
        let candidates: WireCandidate[];
        try {
          candidates = source.candidates(message.index, message.memory_admit_prev);
        } catch (err) {
          if (err instanceof RangeError) {
            throw new ProtocolViolation(err.message);
          }
          throw err;
        }
        write(candidatesLine(message.index, candidates));
        nextIndex += 1;
        break;
      }
      case "close": {
        write(doneLine());
        return;
      }
    }
  }
  throw new ProtocolViolation("peer closed the stream without a close message");
}
