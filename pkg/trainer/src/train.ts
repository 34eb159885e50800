/** Training: Adam over the parameter registry, teacher-forced cross-entropy,
 * per-epoch logging, JSON checkpoints. Defaults: Adam, learning rate 1e-4,
 * 15 fine-tuning epochs. */

import { readFileSync, writeFileSync } from "node:fs";

import { Sample, epochBatches } from "./data.js";
import { ModelConfig, Seq2SeqModel, makeBatch } from "./model.js";
import { Rng } from "./rng.js";
import { Tensor } from "./tensor.js";
import { BOS_ID, EOS_ID, PAD_ID, Vocab } from "./vocab.js";

export interface TrainConfig {
  optimizer: "adam";
  learningRate: number;
  epochs: number;
  batchSize: number;
  seed: number;
}

export const TRAIN_DEFAULTS: TrainConfig = {
  optimizer: "adam",
  learningRate: 1e-4,
  epochs: 15,
  batchSize: 32,
  seed: 0,
};

export function trainConfig(overrides: Partial<TrainConfig> = {}): TrainConfig {
  const cfg = { ...TRAIN_DEFAULTS, ...overrides };
  if (cfg.learningRate <= 0) throw new Error("learningRate must be positive");
  if (cfg.epochs < 1) throw new Error("epochs must be >= 1");
  return cfg;
}

export class Adam {
  private m = new Map<string, Float64Array>();
  private v = new Map<string, Float64Array>();
  private step = 0;

  constructor(
    private params: Map<string, Tensor>,
    private lr: number,
    private beta1 = 0.9,
    private beta2 = 0.999,
    private eps = 1e-8,
  ) {
    for (const [name, t] of params) {
      this.m.set(name, new Float64Array(t.size));
      this.v.set(name, new Float64Array(t.size));
    }
  }

  update(): void {
    this.step++;
    const c1 = 1 - Math.pow(this.beta1, this.step);
    const c2 = 1 - Math.pow(this.beta2, this.step);
    for (const [name, t] of this.params) {
      if (!t.grad) continue;
      const m = this.m.get(name)!;
      const v = this.v.get(name)!;
      const g = t.grad;
      for (let i = 0; i < t.size; i++) {
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g[i];
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g[i] * g[i];
        t.data[i] -= (this.lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + this.eps);
      }
    }
  }
}

export interface EpochLog {
  epoch: number;
  trainLoss: number;
  validLoss?: number;
}

export interface TrainResult {
  history: EpochLog[];
  finalLoss: number;
}

export function train(
  model: Seq2SeqModel,
  samples: Sample[],
  cfg: TrainConfig,
  validSamples: Sample[] | null = null,
  log: (line: string) => void = () => {},
): TrainResult {
  if (samples.length === 0) throw new Error("empty training set");
  const optimizer = new Adam(model.registry.params, cfg.learningRate);
  const rng = new Rng(cfg.seed);
  const history: EpochLog[] = [];
  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    const epochRng = rng.child(epoch);
    const dropRng = epochRng.child(7919);
    let lossSum = 0;
    let batches = 0;
    for (const group of epochBatches(samples, cfg.batchSize, epochRng)) {
      const batch = makeBatch(
        group.map((s) => s.source),
        group.map((s) => s.target),
        PAD_ID, BOS_ID, EOS_ID,
      );
      model.registry.zeroGrads();
      const loss = model.loss(batch, model.cfg.dropout > 0 ? dropRng : null);
      loss.backward();
      optimizer.update();
      lossSum += loss.data[0];
      batches++;
    }
    const entry: EpochLog = { epoch, trainLoss: lossSum / batches };
    if (validSamples && validSamples.length) {
      entry.validLoss = evaluateLoss(model, validSamples, cfg.batchSize);
    }
    history.push(entry);
    log(
      `epoch ${epoch}/${cfg.epochs} train_loss ${entry.trainLoss.toFixed(6)}` +
        (entry.validLoss !== undefined ? ` valid_loss ${entry.validLoss.toFixed(6)}` : ""),
    );
  }
  return { history, finalLoss: history[history.length - 1].trainLoss };
}

export function evaluateLoss(model: Seq2SeqModel, samples: Sample[], batchSize: number): number {
  let lossSum = 0;
  let batches = 0;
  for (let off = 0; off < samples.length; off += batchSize) {
    const group = samples.slice(off, off + batchSize);
    const batch = makeBatch(
      group.map((s) => s.source),
      group.map((s) => s.target),
      PAD_ID, BOS_ID, EOS_ID,
    );
    const loss = model.loss(batch, null);
    lossSum += loss.data[0];
    batches++;
  }
  return lossSum / batches;
}

/** teacher-forced argmax accuracy over non-pad target tokens */
export function tokenAccuracy(model: Seq2SeqModel, samples: Sample[], batchSize = 32): number {
  let correct = 0;
  let total = 0;
  for (let off = 0; off < samples.length; off += batchSize) {
    const group = samples.slice(off, off + batchSize);
    const batch = makeBatch(
      group.map((s) => s.source),
      group.map((s) => s.target),
      PAD_ID, BOS_ID, EOS_ID,
    );
    const enc = model.encode(batch.srcIds, batch.batch, batch.tSrc, batch.encMask, null);
    const logits = model.decode(
      batch.tgtIn, batch.batch, batch.tTgt, enc, batch.tSrc,
      batch.causalMask, batch.crossMask, null,
    );
    const v = model.cfg.vocabSize;
    for (let i = 0; i < batch.tgtOut.length; i++) {
      if (batch.tgtOut[i] === PAD_ID) continue;
      let best = 0;
      let bestVal = -Infinity;
      for (let j = 0; j < v; j++) {
        const val = logits.data[i * v + j];
        if (val > bestVal) {
          bestVal = val;
          best = j;
        }
      }
      total++;
      if (best === batch.tgtOut[i]) correct++;
    }
  }
  return total ? correct / total : 0;
}

// --------------------------------------------------------------------------
// Checkpoints
// --------------------------------------------------------------------------

export interface Checkpoint {
  config: ModelConfig;
  vocabTokens: string[];
  params: Record<string, string>; // base64 float64 little-endian
}

export function saveCheckpoint(path: string, model: Seq2SeqModel, vocab: Vocab): void {
  const params: Record<string, string> = {};
  for (const [name, t] of model.registry.params) {
    params[name] = Buffer.from(t.data.buffer, t.data.byteOffset, t.data.byteLength).toString(
      "base64",
    );
  }
  const doc: Checkpoint = { config: model.cfg, vocabTokens: vocab.tokens, params };
  writeFileSync(path, JSON.stringify(doc));
}

export function loadCheckpoint(path: string): { model: Seq2SeqModel; vocab: Vocab } {
  const doc = JSON.parse(readFileSync(path, "utf-8")) as Checkpoint;
  const vocab = new Vocab(doc.vocabTokens);
  const model = new Seq2SeqModel(doc.config, new Rng(0));
  for (const [name, t] of model.registry.params) {
    const encoded = doc.params[name];
    if (!encoded) throw new Error(`checkpoint missing param ${name}`);
    const buf = Buffer.from(encoded, "base64");
    const arr = new Float64Array(buf.buffer, buf.byteOffset, buf.byteLength / 8);
    if (arr.length !== t.size) throw new Error(`checkpoint param ${name} has wrong size`);
    t.data.set(arr);
  }
  return { model, vocab };
}
