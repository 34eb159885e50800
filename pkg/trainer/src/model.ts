/** Encoder-decoder transformer, sized for a desk, with explicit parameter
 * registry so the optimizer and checkpoints can treat the model as a flat
 * list of named tensors. Attention uses per-head projection matrices and
 * sums per-head output projections (equivalent to concat + one projection).
 */

import { Rng } from "./rng.js";
import {
  Tensor,
  addBias,
  addMask,
  addT,
  bmm,
  crossEntropy,
  dropout,
  embedding,
  gelu,
  layerNorm,
  matmul,
  reshape,
  scale,
  softmaxLastDim,
} from "./tensor.js";

export interface ModelConfig {
  embeddingDim: number;
  layerCount: number;
  headCount: number;
  feedforwardDim: number;
  maxSequenceLength: number;
  dropout: number;
  vocabSize: number;
}

export const DESK_DEFAULTS = {
  embeddingDim: 128,
  layerCount: 2,
  headCount: 4,
  feedforwardDim: 512,
  maxSequenceLength: 258, // dataset token cap (256) plus BOS and EOS
  dropout: 0.1,
};

export function validateConfig(cfg: ModelConfig): void {
  if (cfg.embeddingDim % cfg.headCount !== 0) {
    throw new Error(
      `embeddingDim ${cfg.embeddingDim} not divisible by headCount ${cfg.headCount}`,
    );
  }
  if (cfg.maxSequenceLength < 3) throw new Error("maxSequenceLength too small");
  if (cfg.vocabSize < 5) throw new Error("vocabSize too small");
}

export class ParamRegistry {
  params = new Map<string, Tensor>();

  add(name: string, t: Tensor): Tensor {
    if (this.params.has(name)) throw new Error(`duplicate param ${name}`);
    t.requiresGrad = true;
    this.params.set(name, t);
    return t;
  }

  get(name: string): Tensor {
    const t = this.params.get(name);
    if (!t) throw new Error(`missing param ${name}`);
    return t;
  }

  zeroGrads(): void {
    for (const t of this.params.values()) t.zeroGrad();
  }

  totalCount(): number {
    let n = 0;
    for (const t of this.params.values()) n += t.size;
    return n;
  }
}

interface AttentionParams {
  wq: Tensor[];
  wk: Tensor[];
  wv: Tensor[];
  wo: Tensor[];
  bo: Tensor;
}

interface LayerParams {
  lnSelfG: Tensor;
  lnSelfB: Tensor;
  self: AttentionParams;
  lnCrossG?: Tensor;
  lnCrossB?: Tensor;
  cross?: AttentionParams;
  lnFfG: Tensor;
  lnFfB: Tensor;
  ffIn: Tensor;
  ffInB: Tensor;
  ffOut: Tensor;
  ffOutB: Tensor;
}

export class Seq2SeqModel {
  cfg: ModelConfig;
  registry = new ParamRegistry();
  tokenEmb: Tensor;
  posEmb: Tensor;
  encoder: LayerParams[] = [];
  decoder: LayerParams[] = [];
  lnFinalG: Tensor;
  lnFinalB: Tensor;
  outProj: Tensor;
  outBias: Tensor;

  constructor(cfg: ModelConfig, rng: Rng) {
    validateConfig(cfg);
    this.cfg = cfg;
    const d = cfg.embeddingDim;
    const reg = this.registry;
    const std = 0.02;
    this.tokenEmb = reg.add("token_emb", Tensor.randn([cfg.vocabSize, d], rng, std));
    this.posEmb = reg.add("pos_emb", Tensor.randn([cfg.maxSequenceLength, d], rng, std));
    for (let i = 0; i < cfg.layerCount; i++) {
      this.encoder.push(this.makeLayer(`enc${i}`, rng, false));
    }
    for (let i = 0; i < cfg.layerCount; i++) {
      this.decoder.push(this.makeLayer(`dec${i}`, rng, true));
    }
    this.lnFinalG = reg.add("ln_final_g", ones([d]));
    this.lnFinalB = reg.add("ln_final_b", Tensor.zeros([d]));
    this.outProj = reg.add("out_proj", Tensor.randn([d, cfg.vocabSize], rng, std));
    this.outBias = reg.add("out_bias", Tensor.zeros([cfg.vocabSize]));
  }

  private makeAttention(prefix: string, rng: Rng): AttentionParams {
    const d = this.cfg.embeddingDim;
    const h = this.cfg.headCount;
    const dh = d / h;
    const reg = this.registry;
    const std = 0.02;
    const wq: Tensor[] = [], wk: Tensor[] = [], wv: Tensor[] = [], wo: Tensor[] = [];
    for (let i = 0; i < h; i++) {
      wq.push(reg.add(`${prefix}.q${i}`, Tensor.randn([d, dh], rng, std)));
      wk.push(reg.add(`${prefix}.k${i}`, Tensor.randn([d, dh], rng, std)));
      wv.push(reg.add(`${prefix}.v${i}`, Tensor.randn([d, dh], rng, std)));
      wo.push(reg.add(`${prefix}.o${i}`, Tensor.randn([dh, d], rng, std)));
    }
    return { wq, wk, wv, wo, bo: reg.add(`${prefix}.bo`, Tensor.zeros([d])) };
  }

  private makeLayer(prefix: string, rng: Rng, withCross: boolean): LayerParams {
    const d = this.cfg.embeddingDim;
    const ff = this.cfg.feedforwardDim;
    const reg = this.registry;
    const std = 0.02;
    const layer: LayerParams = {
      lnSelfG: reg.add(`${prefix}.ln_self_g`, ones([d])),
      lnSelfB: reg.add(`${prefix}.ln_self_b`, Tensor.zeros([d])),
      self: this.makeAttention(`${prefix}.self`, rng),
      lnFfG: reg.add(`${prefix}.ln_ff_g`, ones([d])),
      lnFfB: reg.add(`${prefix}.ln_ff_b`, Tensor.zeros([d])),
      ffIn: reg.add(`${prefix}.ff_in`, Tensor.randn([d, ff], rng, std)),
      ffInB: reg.add(`${prefix}.ff_in_b`, Tensor.zeros([ff])),
      ffOut: reg.add(`${prefix}.ff_out`, Tensor.randn([ff, d], rng, std)),
      ffOutB: reg.add(`${prefix}.ff_out_b`, Tensor.zeros([d])),
    };
    if (withCross) {
      layer.lnCrossG = reg.add(`${prefix}.ln_cross_g`, ones([d]));
      layer.lnCrossB = reg.add(`${prefix}.ln_cross_b`, Tensor.zeros([d]));
      layer.cross = this.makeAttention(`${prefix}.cross`, rng);
    }
    return layer;
  }

  /** multi-head attention; query rows [B*Tq, D], key/value rows [B*Tk, D],
   * additive mask [B, Tq, Tk] (0 or -1e30 entries) */
  private attention(
    p: AttentionParams,
    queries: Tensor,
    keysValues: Tensor,
    batch: number,
    tq: number,
    tk: number,
    mask: Float64Array,
    dropRng: Rng | null,
  ): Tensor {
    const d = this.cfg.embeddingDim;
    const dh = d / this.cfg.headCount;
    let summed: Tensor | null = null;
    for (let h = 0; h < this.cfg.headCount; h++) {
      const q = reshape(matmul(queries, p.wq[h]), [batch, tq, dh]);
      const k = reshape(matmul(keysValues, p.wk[h]), [batch, tk, dh]);
      const v = reshape(matmul(keysValues, p.wv[h]), [batch, tk, dh]);
      const scores = scale(bmm(q, transposeBatched(k)), 1 / Math.sqrt(dh));
      const probs = softmaxLastDim(addMask(scores, mask), tk);
      const ctx = reshape(bmm(dropout(probs, this.cfg.dropout, dropRng), v), [batch * tq, dh]);
      const headOut = matmul(ctx, p.wo[h]);
      summed = summed === null ? headOut : addT(summed, headOut);
    }
    return addBias(summed!, p.bo);
  }

  private feedForward(layer: LayerParams, rows: Tensor, dropRng: Rng | null): Tensor {
    const inner = gelu(addBias(matmul(rows, layer.ffIn), layer.ffInB));
    return dropout(addBias(matmul(inner, layer.ffOut), layer.ffOutB), this.cfg.dropout, dropRng);
  }

  /** token + position embedding for ids [B, T] flattened row-major */
  private embed(ids: Int32Array, batch: number, t: number): Tensor {
    if (t > this.cfg.maxSequenceLength) {
      throw new Error(`sequence length ${t} exceeds maxSequenceLength ${this.cfg.maxSequenceLength}`);
    }
    const positions = new Int32Array(batch * t);
    for (let b = 0; b < batch; b++) {
      for (let i = 0; i < t; i++) positions[b * t + i] = i;
    }
    return addT(embedding(this.tokenEmb, ids), embedding(this.posEmb, positions));
  }

  encode(srcIds: Int32Array, batch: number, tSrc: number, padMask: Float64Array, dropRng: Rng | null): Tensor {
    let rows = dropout(this.embed(srcIds, batch, tSrc), this.cfg.dropout, dropRng);
    for (const layer of this.encoder) {
      const normed = layerNorm(rows, layer.lnSelfG, layer.lnSelfB);
      const attnOut = this.attention(layer.self, normed, normed, batch, tSrc, tSrc, padMask, dropRng);
      rows = addT(rows, dropout(attnOut, this.cfg.dropout, dropRng));
      const ffNormed = layerNorm(rows, layer.lnFfG, layer.lnFfB);
      rows = addT(rows, this.feedForward(layer, ffNormed, dropRng));
    }
    return rows;
  }

  decode(
    tgtIds: Int32Array,
    batch: number,
    tTgt: number,
    encRows: Tensor,
    tSrc: number,
    causalMask: Float64Array,
    crossMask: Float64Array,
    dropRng: Rng | null,
  ): Tensor {
    let rows = dropout(this.embed(tgtIds, batch, tTgt), this.cfg.dropout, dropRng);
    for (const layer of this.decoder) {
      const normed = layerNorm(rows, layer.lnSelfG, layer.lnSelfB);
      const selfOut = this.attention(layer.self, normed, normed, batch, tTgt, tTgt, causalMask, dropRng);
      rows = addT(rows, dropout(selfOut, this.cfg.dropout, dropRng));
      const crossNormed = layerNorm(rows, layer.lnCrossG!, layer.lnCrossB!);
      const crossOut = this.attention(
        layer.cross!, crossNormed, encRows, batch, tTgt, tSrc, crossMask, dropRng,
      );
      rows = addT(rows, dropout(crossOut, this.cfg.dropout, dropRng));
      const ffNormed = layerNorm(rows, layer.lnFfG, layer.lnFfB);
      rows = addT(rows, this.feedForward(layer, ffNormed, dropRng));
    }
    const final = layerNorm(rows, this.lnFinalG, this.lnFinalB);
    return addBias(matmul(final, this.outProj), this.outBias); // [B*Tt, V]
  }

  /** teacher-forced loss on a padded batch */
  loss(batchData: PaddedBatch, dropRng: Rng | null): Tensor {
    const enc = this.encode(
      batchData.srcIds, batchData.batch, batchData.tSrc, batchData.encMask, dropRng,
    );
    const logits = this.decode(
      batchData.tgtIn, batchData.batch, batchData.tTgt, enc, batchData.tSrc,
      batchData.causalMask, batchData.crossMask, dropRng,
    );
    return crossEntropy(logits, batchData.tgtOut, batchData.padId);
  }
}

function ones(shape: number[]): Tensor {
  const t = Tensor.zeros(shape);
  t.data.fill(1);
  return t;
}

/** [B, T, D] -> [B, D, T] */
export function transposeBatched(t: Tensor): Tensor {
  const [b, rows, cols] = t.shape;
  const out = new Tensor([b, cols, rows]);
  if (t.requiresGrad || t.backwardFn) {
    out.requiresGrad = true;
    out.parents = [t];
  }
  for (let batch = 0; batch < b; batch++) {
    const off = batch * rows * cols;
    for (let i = 0; i < rows; i++) {
      for (let j = 0; j < cols; j++) {
        out.data[off + j * rows + i] = t.data[off + i * cols + j];
      }
    }
  }
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const tg = t.ensureGrad();
      for (let batch = 0; batch < b; batch++) {
        const off = batch * rows * cols;
        for (let i = 0; i < rows; i++) {
          for (let j = 0; j < cols; j++) {
            tg[off + i * cols + j] += og[off + j * rows + i];
          }
        }
      }
    };
  }
  return out;
}

export interface PaddedBatch {
  batch: number;
  tSrc: number;
  tTgt: number;
  srcIds: Int32Array;
  tgtIn: Int32Array; // BOS-led decoder input
  tgtOut: Int32Array; // EOS-terminated shift-by-one targets (PAD ignored)
  encMask: Float64Array; // [B, tSrc, tSrc]
  causalMask: Float64Array; // [B, tTgt, tTgt]
  crossMask: Float64Array; // [B, tTgt, tSrc]
  padId: number;
}

const NEG = -1e30;

/** pad id sequences and build the three attention masks */
export function makeBatch(
  sources: Int32Array[],
  targets: Int32Array[],
  padId: number,
  bosId: number,
  eosId: number,
): PaddedBatch {
  const batch = sources.length;
  let tSrc = 1;
  let tTgt = 2;
  for (const s of sources) tSrc = Math.max(tSrc, s.length);
  for (const t of targets) tTgt = Math.max(tTgt, t.length + 1); // BOS prefix / EOS suffix
  const srcIds = new Int32Array(batch * tSrc).fill(padId);
  const tgtIn = new Int32Array(batch * tTgt).fill(padId);
  const tgtOut = new Int32Array(batch * tTgt).fill(padId);
  const srcLens = new Int32Array(batch);
  for (let b = 0; b < batch; b++) {
    srcIds.set(sources[b], b * tSrc);
    srcLens[b] = sources[b].length;
    tgtIn[b * tTgt] = bosId;
    tgtIn.set(targets[b], b * tTgt + 1);
    tgtOut.set(targets[b], b * tTgt);
    tgtOut[b * tTgt + targets[b].length] = eosId;
  }
  const encMask = new Float64Array(batch * tSrc * tSrc);
  const causalMask = new Float64Array(batch * tTgt * tTgt);
  const crossMask = new Float64Array(batch * tTgt * tSrc);
  for (let b = 0; b < batch; b++) {
    for (let i = 0; i < tSrc; i++) {
      for (let j = 0; j < tSrc; j++) {
        if (j >= srcLens[b]) encMask[(b * tSrc + i) * tSrc + j] = NEG;
      }
    }
    const tgtLen = targets[b].length + 1;
    for (let i = 0; i < tTgt; i++) {
      for (let j = 0; j < tTgt; j++) {
        if (j > i || j >= tgtLen) causalMask[(b * tTgt + i) * tTgt + j] = NEG;
      }
      for (let j = 0; j < tSrc; j++) {
        if (j >= srcLens[b]) crossMask[(b * tTgt + i) * tSrc + j] = NEG;
      }
    }
  }
  return { batch, tSrc, tTgt, srcIds, tgtIn, tgtOut, encMask, causalMask, crossMask, padId };
}
