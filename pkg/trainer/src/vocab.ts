/** Vocabulary files: one token per line, line number = id, with PAD/BOS/
 * EOS/UNK reserved at 0-3. The trainer shares this format with the dataset
 * generator and extends it with a disjoint region of synthetic-pretraining
 * tokens, so one embedding table serves both phases. */

import { readFileSync, writeFileSync } from "node:fs";

export const PAD_ID = 0;
export const BOS_ID = 1;
export const EOS_ID = 2;
export const UNK_ID = 3;

export class Vocab {
  tokens: string[];
  private ids = new Map<string, number>();

  constructor(tokens: string[]) {
    this.tokens = tokens.slice();
    tokens.forEach((tok, i) => {
      if (this.ids.has(tok)) throw new Error(`duplicate token ${tok}`);
      this.ids.set(tok, i);
    });
    for (const [tok, want] of [["PAD", PAD_ID], ["BOS", BOS_ID], ["EOS", EOS_ID], ["UNK", UNK_ID]] as const) {
      if (this.ids.get(tok) !== want) throw new Error(`reserved token ${tok} must have id ${want}`);
    }
  }

  get size(): number {
    return this.tokens.length;
  }

  id(token: string): number {
    return this.ids.get(token) ?? UNK_ID;
  }

  encode(tokens: string[]): Int32Array {
    return Int32Array.from(tokens, (t) => this.id(t));
  }

  decode(ids: ArrayLike<number>): string[] {
    const out: string[] = [];
    for (let i = 0; i < ids.length; i++) out.push(this.tokens[ids[i]] ?? "UNK");
    return out;
  }

  save(path: string): void {
    writeFileSync(path, this.tokens.join("\n") + "\n");
  }

  static load(path: string): Vocab {
    const lines = readFileSync(path, "utf-8").split("\n").map((l) => l.trim()).filter(Boolean);
    return new Vocab(lines);
  }

  /** append extra tokens in a new id region (stable, deduplicated) */
  extended(extra: string[]): Vocab {
    const out = this.tokens.slice();
    for (const tok of extra) {
      if (!this.ids.has(tok)) out.push(tok);
    }
    return new Vocab(out);
  }
}

/** the synthetic-pretraining alphabet: source region and target region */
export function toyTokens(regionSize = 16): { source: string[]; target: string[] } {
  const source: string[] = [];
  const target: string[] = [];
  for (let i = 0; i < regionSize; i++) {
    source.push(`ta${i}`);
    target.push(`tb${i}`);
  }
  return { source, target };
}
