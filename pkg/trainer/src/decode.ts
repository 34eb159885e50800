/** Greedy (beam 1) autoregressive decoding: one prediction line per input
 * line, EOS-terminated, truncated at the model's sequence limit. */

import { Seq2SeqModel, makeBatch } from "./model.js";
import { Sample } from "./data.js";
import { BOS_ID, EOS_ID, PAD_ID, Vocab } from "./vocab.js";

export function greedyDecode(
  model: Seq2SeqModel,
  source: Int32Array,
  maxNewTokens?: number,
): number[] {
  const limit = Math.min(
    maxNewTokens ?? model.cfg.maxSequenceLength - 1,
    model.cfg.maxSequenceLength - 1,
  );
  const src = source.length ? source : Int32Array.from([PAD_ID]);
  const batch = makeBatch([src], [new Int32Array(0)], PAD_ID, BOS_ID, EOS_ID);
  const enc = model.encode(batch.srcIds, 1, batch.tSrc, batch.encMask, null);
  const out: number[] = [];
  const v = model.cfg.vocabSize;
  while (out.length < limit) {
    const tTgt = out.length + 1;
    const tgtIn = new Int32Array(tTgt);
    tgtIn[0] = BOS_ID;
    for (let i = 0; i < out.length; i++) tgtIn[i + 1] = out[i];
    const causal = new Float64Array(tTgt * tTgt);
    for (let i = 0; i < tTgt; i++) {
      for (let j = i + 1; j < tTgt; j++) causal[i * tTgt + j] = -1e30;
    }
    const cross = new Float64Array(tTgt * batch.tSrc);
    for (let i = 0; i < tTgt; i++) {
      for (let j = src.length; j < batch.tSrc; j++) cross[i * batch.tSrc + j] = -1e30;
    }
    const logits = model.decode(tgtIn, 1, tTgt, enc, batch.tSrc, causal, cross, null);
    const off = (tTgt - 1) * v;
    let best = 0;
    let bestVal = -Infinity;
    for (let j = 0; j < v; j++) {
      const val = logits.data[off + j];
      if (val > bestVal) {
        bestVal = val;
        best = j;
      }
    }
    if (best === EOS_ID) break;
    out.push(best);
  }
  return out;
}

export function decodeAll(model: Seq2SeqModel, samples: Sample[], vocab: Vocab): string[][] {
  return samples.map((s) => vocab.decode(greedyDecode(model, s.source)));
}
