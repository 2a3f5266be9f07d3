import { describe, expect, it } from "vitest";

import { SchemaError } from "../src/protocol.js";
import { parseTranscript } from "../src/transcript.js";
import { candidate } from "./helpers.js";

const header = { width: 256, height: 256, prompt_box: [50, 60, 10, 8] };

describe("transcript parsing", () => {
  it("parses a valid document", () => {
    const t = parseTranscript({ header, frames: [[candidate()], []] });
    expect(t.frames).toHaveLength(2);
    expect(t.header.width).toBe(256);
  });

  it("refuses to start on malformed documents", () => {
    expect(() => parseTranscript({ frames: [] })).toThrow(SchemaError);
    expect(() => parseTranscript({ header })).toThrow(SchemaError);
    expect(() => parseTranscript({ header, frames: [[candidate({ area: -1 })]] })).toThrow(
      /frame 0/,
    );
    expect(() =>
      parseTranscript({ header, frames: [Array(4).fill(candidate())] }),
    ).toThrow(/at most 3/);
  });
});
