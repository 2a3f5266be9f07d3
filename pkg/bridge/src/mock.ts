/** Transcript-backed candidate source for conformance testing. */

import { InitMessage, WireCandidate } from "./protocol.js";
import { Transcript } from "./transcript.js";
import { CandidateSource } from "./server.js";

export class MockSource implements CandidateSource {
  constructor(private readonly transcript: Transcript) {}

  begin(_init: InitMessage): void {
    // The mock replays regardless of the prompt; the header is advisory.
  }

  candidates(index: number, _memoryAdmitPrev: boolean): WireCandidate[] {
    const frames = this.transcript.frames;
    if (index >= frames.length) {
      throw new RangeError(`frame ${index} beyond transcript of ${frames.length} frames`);
    }
    return frames[index];
  }
}
