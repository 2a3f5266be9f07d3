/**
 * CLI entry: serve one sequence over stdio.
 *
 *   node dist/main.js mock <transcript.json>
 *   node dist/main.js demo <script.json>      (scripted adapter through the
 *                                              model-adapter path)
 *
 * Protocol violations from the peer and malformed input files go to
 * stderr with a nonzero exit.
 */

import { createInterface } from "node:readline";
import { readFileSync } from "node:fs";
import { SchemaError } from "./protocol.js";
import { loadTranscript } from "./transcript.js";
import { MockSource } from "./mock.js";
import { AdapterMask, AdapterSource, ScriptedAdapter } from "./adapter.js";
import { CandidateSource, ProtocolViolation, serveLines } from "./server.js";

function usage(): never {
  console.error("usage: main.js mock <transcript.json> | demo <script.json>");
  process.exit(2);
}

function buildSource(argv: string[]): CandidateSource {
  const [command, path] = argv;
  if (command === "mock") {
    if (!path) usage();
    return new MockSource(loadTranscript(path));
  }
  if (command === "demo") {
    if (!path) usage();
    const frames = JSON.parse(readFileSync(path, "utf8")) as AdapterMask[][];
    return new AdapterSource(new ScriptedAdapter(frames));
  }
  usage();
}

async function main(): Promise<number> {
  let source: CandidateSource;
  try {
    source = buildSource(process.argv.slice(2));
  } catch (err) {
    console.error(`refusing to start: ${(err as Error).message}`);
    return 2;
  }
  const lines = createInterface({ input: process.stdin, crlfDelay: Infinity });
  try {
    await serveLines(source, lines, (line) => process.stdout.write(line + "\n"));
    return 0;
  } catch (err) {
    if (err instanceof ProtocolViolation || err instanceof SchemaError) {
      console.error(`protocol violation: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);
