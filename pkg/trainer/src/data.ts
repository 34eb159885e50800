/** Dataset files: one sample per line, problem tokens TAB solution tokens.
 * The format is shared with the generator; unknown tokens map to UNK. */

import { readFileSync, writeFileSync } from "node:fs";

import { Rng } from "./rng.js";
import { Vocab } from "./vocab.js";

export interface Sample {
  source: Int32Array;
  target: Int32Array;
}

export function readPairsFile(path: string): Array<{ problem: string[]; solution: string[] }> {
  const out: Array<{ problem: string[]; solution: string[] }> = [];
  const text = readFileSync(path, "utf-8");
  let lineNo = 0;
  for (const raw of text.split("\n")) {
    lineNo++;
    if (!raw) continue;
    const fields = raw.split("\t");
    if (fields.length !== 2) {
      throw new Error(`${path}:${lineNo}: expected 2 tab-separated fields`);
    }
    out.push({ problem: fields[0].split(" "), solution: fields[1].split(" ") });
  }
  return out;
}

export function encodePairs(
  rows: Array<{ problem: string[]; solution: string[] }>,
  vocab: Vocab,
): Sample[] {
  return rows.map((r) => ({
    source: vocab.encode(r.problem),
    target: vocab.encode(r.solution),
  }));
}

export function loadDataset(path: string, vocab: Vocab): Sample[] {
  return encodePairs(readPairsFile(path), vocab);
}

export function writePredictions(path: string, lines: string[][]): void {
  writeFileSync(path, lines.map((l) => l.join(" ")).join("\n") + "\n");
}

/** deterministic epoch batching: shuffle indices, slice */
export function* epochBatches(
  samples: Sample[],
  batchSize: number,
  rng: Rng,
): Generator<Sample[]> {
  const order = samples.map((_, i) => i);
  rng.shuffle(order);
  for (let off = 0; off < order.length; off += batchSize) {
    yield order.slice(off, off + batchSize).map((i) => samples[i]);
  }
}
