/** Reverse-mode autograd over dense float64 tensors.
 *
 * Shapes are row-major. The graph is a tape: every op records its inputs
 * and a backward closure; backward() walks the tape in reverse topological
 * order. Only what the transformer needs is implemented: matmul (batched),
 * elementwise arithmetic, gelu, layer norm, softmax cross-entropy,
 * embedding gather, and a handful of shape utilities.
 */

import { Rng } from "./rng.js";

export class Tensor {
  data: Float64Array;
  grad: Float64Array | null = null;
  shape: number[];
  requiresGrad: boolean;
  /** inputs of the op that produced this tensor (empty for leaves) */
  parents: Tensor[] = [];
  backwardFn: (() => void) | null = null;

  constructor(shape: number[], data?: Float64Array, requiresGrad = false) {
    this.shape = shape.slice();
    const n = shape.reduce((a, b) => a * b, 1);
    this.data = data ?? new Float64Array(n);
    if (data && data.length !== n) throw new Error(`data length ${data.length} != shape ${shape}`);
    this.requiresGrad = requiresGrad;
  }

  get size(): number {
    return this.data.length;
  }

  ensureGrad(): Float64Array {
    if (!this.grad) this.grad = new Float64Array(this.size);
    return this.grad;
  }

  zeroGrad(): void {
    if (this.grad) this.grad.fill(0);
  }

  static zeros(shape: number[], requiresGrad = false): Tensor {
    return new Tensor(shape, undefined, requiresGrad);
  }

  static randn(shape: number[], rng: Rng, std = 0.02, requiresGrad = true): Tensor {
    const t = new Tensor(shape, undefined, requiresGrad);
    for (let i = 0; i < t.size; i++) t.data[i] = rng.normal() * std;
    return t;
  }

  static from(values: number[], shape?: number[]): Tensor {
    const t = new Tensor(shape ?? [values.length], Float64Array.from(values));
    return t;
  }

  /** run reverse-mode accumulation from this scalar */
  backward(): void {
    if (this.size !== 1) throw new Error("backward() expects a scalar loss");
    const order: Tensor[] = [];
    const seen = new Set<Tensor>();
    const visit = (t: Tensor) => {
      if (seen.has(t)) return;
      seen.add(t);
      for (const p of t.parents) visit(p);
      order.push(t);
    };
    visit(this);
    this.ensureGrad().fill(1);
    for (let i = order.length - 1; i >= 0; i--) {
      const node = order[i];
      if (node.backwardFn) node.backwardFn();
    }
  }
}

function needsGrad(...ts: Tensor[]): boolean {
  return ts.some((t) => t.requiresGrad || t.backwardFn !== null);
}

function child(shape: number[], parents: Tensor[]): Tensor {
  const out = new Tensor(shape);
  if (needsGrad(...parents)) {
    out.requiresGrad = true;
    out.parents = parents;
  }
  return out;
}

/** C[b] = A[b] @ B[b] for stacks of matrices. A: [B, M, K], B: [B, K, N]
 * (batch of 1 broadcasts the second operand when its batch dim is 1). */
export function bmm(a: Tensor, b: Tensor): Tensor {
  const [ba, m, k] = a.shape;
  const [bb, k2, n] = b.shape;
  if (k !== k2 || (ba !== bb && bb !== 1)) {
    throw new Error(`bmm shape mismatch ${a.shape} x ${b.shape}`);
  }
  const out = child([ba, m, n], [a, b]);
  const ad = a.data, bd = b.data, od = out.data;
  for (let batch = 0; batch < ba; batch++) {
    const aOff = batch * m * k;
    const bOff = (bb === 1 ? 0 : batch) * k * n;
    const oOff = batch * m * n;
    for (let i = 0; i < m; i++) {
      const aRow = aOff + i * k;
      const oRow = oOff + i * n;
      // two k-steps per pass keeps the accumulator traffic down
      let kk = 0;
      for (; kk + 1 < k; kk += 2) {
        const av0 = ad[aRow + kk];
        const av1 = ad[aRow + kk + 1];
        const bRow0 = bOff + kk * n;
        const bRow1 = bRow0 + n;
        for (let j = 0; j < n; j++) {
          od[oRow + j] += av0 * bd[bRow0 + j] + av1 * bd[bRow1 + j];
        }
      }
      if (kk < k) {
        const av = ad[aRow + kk];
        const bRow = bOff + kk * n;
        for (let j = 0; j < n; j++) {
          od[oRow + j] += av * bd[bRow + j];
        }
      }
    }
  }
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const ag = a.ensureGrad();
      const bg = b.ensureGrad();
      for (let batch = 0; batch < ba; batch++) {
        const aOff = batch * m * k;
        const bOff = (bb === 1 ? 0 : batch) * k * n;
        const oOff = batch * m * n;
        // dA = dC @ B^T ; dB += A^T @ dC
        for (let i = 0; i < m; i++) {
          const oRow = oOff + i * n;
          const aRow = aOff + i * k;
          for (let kk = 0; kk < k; kk++) {
            const bRow = bOff + kk * n;
            let acc = 0;
            for (let j = 0; j < n; j++) acc += og[oRow + j] * bd[bRow + j];
            ag[aRow + kk] += acc;
            const av = ad[aRow + kk];
            if (av !== 0) {
              for (let j = 0; j < n; j++) bg[bRow + j] += av * og[oRow + j];
            }
          }
        }
      }
    };
  }
  return out;
}

/** 2D matmul as a batch of one */
export function matmul(a: Tensor, b: Tensor): Tensor {
  const a3 = reshape(a, [1, a.shape[0], a.shape[1]]);
  const b3 = reshape(b, [1, b.shape[0], b.shape[1]]);
  return reshape(bmm(a3, b3), [a.shape[0], b.shape[1]]);
}

export function reshape(t: Tensor, shape: number[]): Tensor {
  const n = shape.reduce((x, y) => x * y, 1);
  if (n !== t.size) throw new Error(`reshape ${t.shape} -> ${shape}`);
  const out = child(shape, [t]);
  out.data.set(t.data);
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const tg = t.ensureGrad();
      const og = out.grad!;
      for (let i = 0; i < og.length; i++) tg[i] += og[i];
    };
  }
  return out;
}

export function addT(a: Tensor, b: Tensor): Tensor {
  if (a.size !== b.size) throw new Error(`add shape mismatch ${a.shape} vs ${b.shape}`);
  const out = child(a.shape, [a, b]);
  for (let i = 0; i < out.size; i++) out.data[i] = a.data[i] + b.data[i];
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const ag = a.ensureGrad(), bg = b.ensureGrad();
      for (let i = 0; i < og.length; i++) {
        ag[i] += og[i];
        bg[i] += og[i];
      }
    };
  }
  return out;
}

/** broadcast a [D] bias over the last dimension of t */
export function addBias(t: Tensor, bias: Tensor): Tensor {
  const d = bias.size;
  if (t.size % d !== 0) throw new Error("bias does not divide tensor");
  const out = child(t.shape, [t, bias]);
  for (let i = 0; i < t.size; i++) out.data[i] = t.data[i] + bias.data[i % d];
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const tg = t.ensureGrad(), bg = bias.ensureGrad();
      for (let i = 0; i < og.length; i++) {
        tg[i] += og[i];
        bg[i % d] += og[i];
      }
    };
  }
  return out;
}

export function scale(t: Tensor, s: number): Tensor {
  const out = child(t.shape, [t]);
  for (let i = 0; i < t.size; i++) out.data[i] = t.data[i] * s;
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const tg = t.ensureGrad();
      for (let i = 0; i < og.length; i++) tg[i] += og[i] * s;
    };
  }
  return out;
}

/** tanh-approximation gelu: smooth, so finite-difference checks converge */
export function gelu(t: Tensor): Tensor {
  const out = child(t.shape, [t]);
  const c = Math.sqrt(2 / Math.PI);
  for (let i = 0; i < t.size; i++) {
    const x = t.data[i];
    out.data[i] = 0.5 * x * (1 + Math.tanh(c * (x + 0.044715 * x * x * x)));
  }
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const tg = t.ensureGrad();
      for (let i = 0; i < og.length; i++) {
        const x = t.data[i];
        const u = c * (x + 0.044715 * x * x * x);
        const tanhU = Math.tanh(u);
        const sech2 = 1 - tanhU * tanhU;
        const du = c * (1 + 3 * 0.044715 * x * x);
        tg[i] += og[i] * (0.5 * (1 + tanhU) + 0.5 * x * sech2 * du);
      }
    };
  }
  return out;
}

/** normalize over the last dimension, then scale and shift */
export function layerNorm(t: Tensor, gain: Tensor, bias: Tensor, eps = 1e-5): Tensor {
  const d = gain.size;
  const rows = t.size / d;
  const out = child(t.shape, [t, gain, bias]);
  const mean = new Float64Array(rows);
  const invStd = new Float64Array(rows);
  for (let r = 0; r < rows; r++) {
    const off = r * d;
    let m = 0;
    for (let i = 0; i < d; i++) m += t.data[off + i];
    m /= d;
    let v = 0;
    for (let i = 0; i < d; i++) {
      const dx = t.data[off + i] - m;
      v += dx * dx;
    }
    v /= d;
    mean[r] = m;
    invStd[r] = 1 / Math.sqrt(v + eps);
    for (let i = 0; i < d; i++) {
      const xhat = (t.data[off + i] - m) * invStd[r];
      out.data[off + i] = xhat * gain.data[i] + bias.data[i];
    }
  }
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const tg = t.ensureGrad(), gg = gain.ensureGrad(), bg = bias.ensureGrad();
      for (let r = 0; r < rows; r++) {
        const off = r * d;
        const is = invStd[r];
        let sumDy = 0;
        let sumDyXhat = 0;
        for (let i = 0; i < d; i++) {
          const xhat = (t.data[off + i] - mean[r]) * is;
          const dy = og[off + i] * gain.data[i];
          sumDy += dy;
          sumDyXhat += dy * xhat;
          gg[i] += og[off + i] * xhat;
          bg[i] += og[off + i];
        }
        for (let i = 0; i < d; i++) {
          const xhat = (t.data[off + i] - mean[r]) * is;
          const dy = og[off + i] * gain.data[i];
          tg[off + i] += is * (dy - sumDy / d - (xhat * sumDyXhat) / d);
        }
      }
    };
  }
  return out;
}

/** row-wise softmax over the last dimension, with an additive mask of
 * -Infinity entries already applied to the input */
export function softmaxLastDim(t: Tensor, lastDim: number): Tensor {
  const rows = t.size / lastDim;
  const out = child(t.shape, [t]);
  for (let r = 0; r < rows; r++) {
    const off = r * lastDim;
    let max = -Infinity;
    for (let i = 0; i < lastDim; i++) max = Math.max(max, t.data[off + i]);
    let sum = 0;
    for (let i = 0; i < lastDim; i++) {
      const e = max === -Infinity ? 0 : Math.exp(t.data[off + i] - max);
      out.data[off + i] = e;
      sum += e;
    }
    if (sum > 0) {
      for (let i = 0; i < lastDim; i++) out.data[off + i] /= sum;
    }
  }
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const tg = t.ensureGrad();
      for (let r = 0; r < rows; r++) {
        const off = r * lastDim;
        let dot = 0;
        for (let i = 0; i < lastDim; i++) dot += og[off + i] * out.data[off + i];
        for (let i = 0; i < lastDim; i++) {
          tg[off + i] += out.data[off + i] * (og[off + i] - dot);
        }
      }
    };
  }
  return out;
}

/** additive attention mask applied in place of -inf: out = t + mask where
 * mask entries are 0 or -1e30 (a finite stand-in that never overflows) */
export function addMask(t: Tensor, mask: Float64Array): Tensor {
  if (mask.length !== t.size) throw new Error("mask size mismatch");
  const out = child(t.shape, [t]);
  for (let i = 0; i < t.size; i++) out.data[i] = t.data[i] + mask[i];
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const tg = t.ensureGrad();
      for (let i = 0; i < og.length; i++) tg[i] += og[i];
    };
  }
  return out;
}

/** rows of an embedding table: ids [N] -> [N, D] */
export function embedding(table: Tensor, ids: Int32Array): Tensor {
  const [, d] = table.shape;
  const out = child([ids.length, d], [table]);
  for (let i = 0; i < ids.length; i++) {
    out.data.set(table.data.subarray(ids[i] * d, (ids[i] + 1) * d), i * d);
  }
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const tg = table.ensureGrad();
      for (let i = 0; i < ids.length; i++) {
        const src = i * d;
        const dst = ids[i] * d;
        for (let j = 0; j < d; j++) tg[dst + j] += og[src + j];
      }
    };
  }
  return out;
}

/** mean token-level cross-entropy of logits [N, V] against targets [N],
 * ignoring positions whose target is `ignoreId` */
export function crossEntropy(logits: Tensor, targets: Int32Array, ignoreId: number): Tensor {
  const [n, v] = logits.shape;
  if (targets.length !== n) throw new Error("target length mismatch");
  const out = child([1], [logits]);
  const probs = new Float64Array(n * v);
  let counted = 0;
  let total = 0;
  for (let i = 0; i < n; i++) {
    if (targets[i] === ignoreId) continue;
    const off = i * v;
    let max = -Infinity;
    for (let j = 0; j < v; j++) max = Math.max(max, logits.data[off + j]);
    let sum = 0;
    for (let j = 0; j < v; j++) {
      const e = Math.exp(logits.data[off + j] - max);
      probs[off + j] = e;
      sum += e;
    }
    for (let j = 0; j < v; j++) probs[off + j] /= sum;
    total += -Math.log(probs[off + targets[i]] + 1e-300);
    counted++;
  }
  out.data[0] = counted > 0 ? total / counted : 0;
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const g = out.grad![0];
      const lg = logits.ensureGrad();
      if (counted === 0) return;
      for (let i = 0; i < n; i++) {
        if (targets[i] === ignoreId) continue;
        const off = i * v;
        for (let j = 0; j < v; j++) {
          const indicator = j === targets[i] ? 1 : 0;
          lg[off + j] += (g * (probs[off + j] - indicator)) / counted;
        }
      }
    };
  }
  return out;
}

/** inverted dropout; identity when p = 0 or rng is null (eval mode) */
export function dropout(t: Tensor, p: number, rng: Rng | null): Tensor {
  if (p <= 0 || rng === null) return t;
  const keep = 1 - p;
  const mask = new Float64Array(t.size);
  for (let i = 0; i < t.size; i++) mask[i] = rng.next() < keep ? 1 / keep : 0;
  const out = child(t.shape, [t]);
  for (let i = 0; i < t.size; i++) out.data[i] = t.data[i] * mask[i];
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      const tg = t.ensureGrad();
      for (let i = 0; i < og.length; i++) tg[i] += og[i] * mask[i];
    };
  }
  return out;
}

/** concatenate along the first axis (used to stack per-head outputs) */
export function concatRows(parts: Tensor[]): Tensor {
  const cols = parts[0].size / parts[0].shape[0];
  let rows = 0;
  for (const p of parts) rows += p.shape[0];
  const out = child([rows, cols], parts);
  let off = 0;
  for (const p of parts) {
    out.data.set(p.data, off);
    off += p.size;
  }
  if (out.requiresGrad) {
    out.backwardFn = () => {
      const og = out.grad!;
      let o = 0;
      for (const p of parts) {
        const pg = p.ensureGrad();
        for (let i = 0; i < p.size; i++) pg[i] += og[o + i];
        o += p.size;
      }
    };
  }
  return out;
}
