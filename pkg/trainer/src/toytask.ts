/** Synthetic pretraining corpus: sequence translation without any real
 * language. Source strings over one token region map to targets that are
 * reversed and pushed through a fixed substitution cipher into a disjoint
 * region. The structure (order matters, token-to-token correspondences)
 * is what transfers; the content is noise. */

import { writeFileSync } from "node:fs";

import { Rng } from "./rng.js";
import { toyTokens } from "./vocab.js";

export type ToyKind = "reverse-cipher" | "copy" | "reverse";

export function makeToyCorpus(
  count: number,
  seed: number,
  kind: ToyKind = "reverse-cipher",
  minLen = 3,
  maxLen = 10,
  regionSize = 16,
): Array<{ problem: string[]; solution: string[] }> {
  const { source, target } = toyTokens(regionSize);
  const rng = new Rng(seed);
  const rows: Array<{ problem: string[]; solution: string[] }> = [];
  for (let i = 0; i < count; i++) {
    const len = minLen + rng.int(maxLen - minLen + 1);
    const src: string[] = [];
    const idx: number[] = [];
    for (let j = 0; j < len; j++) {
      const k = rng.int(regionSize);
      idx.push(k);
      src.push(source[k]);
    }
    let sol: string[];
    if (kind === "copy") {
      sol = src.slice();
    } else if (kind === "reverse") {
      sol = src.slice().reverse();
    } else {
      sol = idx.slice().reverse().map((k) => target[k]);
    }
    rows.push({ problem: src, solution: sol });
  }
  return rows;
}

export function writeToyCorpus(path: string, rows: Array<{ problem: string[]; solution: string[] }>): void {
  writeFileSync(
    path,
    rows.map((r) => r.problem.join(" ") + "\t" + r.solution.join(" ")).join("\n") + "\n",
  );
}
