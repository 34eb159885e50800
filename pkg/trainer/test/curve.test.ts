/** Shape contract of the learning-curve harness, exercised at toy scale
 * against real generated data and real `symforge eval` scoring. */

import { execFileSync } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { learningCurve } from "../src/curve.js";
import { Seq2SeqModel } from "../src/model.js";
import { Rng } from "../src/rng.js";
import { saveCheckpoint } from "../src/train.js";
import { Vocab, toyTokens } from "../src/vocab.js";

function symforge(args: string[]): void {
  try {
    execFileSync("symforge", args, { encoding: "utf-8" });
  } catch {
    execFileSync("python3", ["-m", "symforge.cli", ...args], { encoding: "utf-8" });
  }
}

const TOY_MODEL = {
  embeddingDim: 16,
  layerCount: 1,
  headCount: 2,
  feedforwardDim: 32,
  maxSequenceLength: 64,
  dropout: 0.0,
  vocabSize: 72,
};

describe("learning-curve harness", () => {
  it("emits one cell per (task, size, init) and a limitation note", () => {
    const dir = mkdtempSync(join(tmpdir(), "curve-shape-"));
    symforge([
      "generate", "--task", "bwd", "--count", "120", "--seed", "3",
      "--min-ops", "1", "--max-ops", "2", "--out", join(dir, "all.tsv"),
    ]);
    symforge([
      "split", "--in", join(dir, "all.tsv"), "--out-prefix", join(dir, "bwd"),
      "--train", "0.8", "--valid", "0.0", "--test", "0.2",
    ]);
    const sfPath = join(dir, "sf.txt");
    execFileSync("python3", [
      "-c",
      `from symforge import build_vocabulary; build_vocabulary().save(${JSON.stringify(sfPath)})`,
    ]);
    const { source, target } = toyTokens(16);
    const vocab = Vocab.load(sfPath).extended([...source, ...target]);
    const pretrained = new Seq2SeqModel(TOY_MODEL, new Rng(1));
    const ckpt = join(dir, "pre.ckpt.json");
    saveCheckpoint(ckpt, pretrained, vocab);

    const report = learningCurve({
      tasks: [{ task: "bwd", trainFile: join(dir, "bwd.train"), testFile: join(dir, "bwd.test") }],
      sizes: [20, 60],
      modelConfig: TOY_MODEL,
      train: { epochs: 1, learningRate: 1e-3, batchSize: 16, seed: 2 },
      pretrainedCheckpoint: ckpt,
      vocab,
      workdir: dir,
    });

    expect(report.note).toContain("synthetic");
    const keys = report.cells.map((c) => `${c.task}/${c.size}/${c.init}`);
    expect(keys.sort()).toEqual(
      ["bwd/20/pretrained", "bwd/20/scratch", "bwd/60/pretrained", "bwd/60/scratch"].sort(),
    );
    for (const cell of report.cells) {
      expect(cell.accuracy).toBeGreaterThanOrEqual(0);
      expect(cell.accuracy).toBeLessThanOrEqual(100);
      expect(Number.isFinite(cell.finalLoss)).toBe(true);
    }
  }, 300_000);

  it("rejects sizes beyond the training file", () => {
    const dir = mkdtempSync(join(tmpdir(), "curve-reject-"));
    symforge([
      "generate", "--task", "bwd", "--count", "30", "--seed", "4",
      "--min-ops", "1", "--max-ops", "2", "--out", join(dir, "tiny.tsv"),
    ]);
    const sfPath = join(dir, "sf.txt");
    execFileSync("python3", [
      "-c",
      `from symforge import build_vocabulary; build_vocabulary().save(${JSON.stringify(sfPath)})`,
    ]);
    const { source, target } = toyTokens(16);
    const vocab = Vocab.load(sfPath).extended([...source, ...target]);
    expect(() =>
      learningCurve({
        tasks: [{ task: "bwd", trainFile: join(dir, "tiny.tsv"), testFile: join(dir, "tiny.tsv") }],
        sizes: [500],
        modelConfig: TOY_MODEL,
        train: { epochs: 1 },
        pretrainedCheckpoint: null,
        vocab,
      }),
    ).toThrow(/exceeds/);
  }, 120_000);
});
