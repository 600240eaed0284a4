/** A small causal transformer LM with hand-written backprop.
 *
 * Pre-norm blocks (rmsnorm, multi-head attention, rmsnorm, relu MLP) over
 * learned token+position embeddings, untied output head. Everything lives
 * in one flat Float32Array per role (params/grads), so the optimizer and
 * checkpointing never walk a structure.
 */

import { Rng } from "./rng.js";
import { matmul, matmulBackX, matmulBackW } from "./tensor.js";
import { VOCAB_SIZE } from "./vocab.js";

export interface ModelConfig {
  layers: number;
  heads: number;
  dim: number;
  ctx: number;
}

interface Block {
  name: string;
  offset: number;
  rows: number;
  cols: number;
}

const EPS = 1e-5;

function buildLayout(cfg: ModelConfig): { blocks: Block[]; total: number } {
  const d = cfg.dim;
  const blocks: Block[] = [];
  let total = 0;
  const add = (name: string, rows: number, cols: number) => {
    blocks.push({ name, offset: total, rows, cols });
    total += rows * cols;
  };
  add("wte", VOCAB_SIZE, d);
  add("wpe", cfg.ctx, d);
  for (let l = 0; l < cfg.layers; l++) {
    add(`l${l}.wq`, d, d);
    add(`l${l}.wk`, d, d);
    add(`l${l}.wv`, d, d);
    add(`l${l}.wo`, d, d);
    add(`l${l}.w1`, 4 * d, d);
    add(`l${l}.w2`, d, 4 * d);
  }
  add("whead", VOCAB_SIZE, d);
  return { blocks, total };
}

/** y[yo..yo+d) = rmsnorm(x[xo..xo+d)); returns the 1/rms factor. */
function rmsnormRow(
  x: Float32Array,
  xo: number,
  y: Float32Array,
  yo: number,
  d: number,
): number {
  let ms = 0;
  for (let i = 0; i < d; i++) ms += x[xo + i] * x[xo + i];
  const inv = 1 / Math.sqrt(ms / d + EPS);
  for (let i = 0; i < d; i++) y[yo + i] = x[xo + i] * inv;
  return inv;
}

/** dx += backprop of rmsnorm given dy, the input row, and its inv factor. */
function rmsnormBackRow(
  dy: Float32Array,
  dyo: number,
  x: Float32Array,
  xo: number,
  inv: number,
  dx: Float32Array,
  dxo: number,
  d: number,
): void {
  let dot = 0;
  for (let i = 0; i < d; i++) dot += dy[dyo + i] * x[xo + i];
  const k = (inv * inv * inv * dot) / d;
  for (let i = 0; i < d; i++) {
    dx[dxo + i] += dy[dyo + i] * inv - x[xo + i] * k;
  }
}

/** Per-layer activation scratch, sized once at ctx. */
interface LayerActs {
  xin: Float32Array; // block input
  inv1: Float32Array; // rmsnorm factors, first norm
  n1: Float32Array;
  q: Float32Array;
  k: Float32Array;
  v: Float32Array;
  att: Float32Array; // [H, T, T] probabilities, causal rows
  mix: Float32Array; // concatenated head outputs
  xmid: Float32Array; // after attention residual
  inv2: Float32Array;
  n2: Float32Array;
  hpre: Float32Array; // mlp pre-relu
  hpost: Float32Array;
}

export class Model {
  readonly cfg: ModelConfig;
  readonly params: Float32Array;
  readonly grads: Float32Array;
  private readonly blocks: Map<string, Block>;

  // training scratch
  private layerActs: LayerActs[] | null = null;
  private x0: Float32Array | null = null;
  private invF: Float32Array | null = null;
  private nF: Float32Array | null = null;
  private logits: Float32Array | null = null;
  private dx: Float32Array | null = null;
  private dscratch: Float32Array | null = null;

  constructor(cfg: ModelConfig, params?: Float32Array) {
    if (cfg.dim % cfg.heads !== 0) {
      throw new Error(`dim ${cfg.dim} not divisible by heads ${cfg.heads}`);
    }
    this.cfg = cfg;
    const { blocks, total } = buildLayout(cfg);
    this.blocks = new Map(blocks.map((b) => [b.name, b]));
    if (params !== undefined && params.length !== total) {
      throw new Error(`parameter buffer has ${params.length} values, layout needs ${total}`);
    }
    this.params = params ?? new Float32Array(total);
    this.grads = new Float32Array(total);
  }

  static init(cfg: ModelConfig, seed: number): Model {
    const model = new Model(cfg);
    const rng = new Rng(seed);
    const p = model.params;
    for (let i = 0; i < p.length; i++) p[i] = 0.08 * rng.gauss();
    return model;
  }

  get size(): number {
    return this.params.length;
  }

  block(name: string): { offset: number; rows: number; cols: number } {
    const b = this.blocks.get(name);
    if (!b) throw new Error(`no parameter block ${name}`);
    return b;
  }

  private w(name: string): Float32Array {
    const b = this.block(name);
    return this.params.subarray(b.offset, b.offset + b.rows * b.cols);
  }

  private g(name: string): Float32Array {
    const b = this.block(name);
    return this.grads.subarray(b.offset, b.offset + b.rows * b.cols);
  }

  private ensureScratch(): void {
    if (this.layerActs !== null) return;
    const { ctx: T, dim: d, heads: H, layers: L } = this.cfg;
    const mk = (n: number) => new Float32Array(n);
    this.layerActs = [];
    for (let l = 0; l < L; l++) {
      this.layerActs.push({
        xin: mk(T * d),
        inv1: mk(T),
        n1: mk(T * d),
        q: mk(T * d),
        k: mk(T * d),
        v: mk(T * d),
        att: mk(H * T * T),
        mix: mk(T * d),
        xmid: mk(T * d),
        inv2: mk(T),
        n2: mk(T * d),
        hpre: mk(T * 4 * d),
        hpost: mk(T * 4 * d),
      });
    }
    this.x0 = mk(T * d);
    this.invF = mk(T);
    this.nF = mk(T * d);
    this.logits = mk(T * VOCAB_SIZE);
    this.dx = mk(T * d);
    this.dscratch = mk(T * 4 * d);
  }

  /**
   * Mean next-token cross-entropy over tokens[0..n-2] -> tokens[1..n-1].
   * With withGrad, accumulates into this.grads.
   */
  private run(tokens: Int32Array, withGrad: boolean): number {
    const { dim: d, heads: H, layers: L, ctx } = this.cfg;
    const n = tokens.length;
    if (n < 2) throw new Error("need at least two tokens to train on");
    const T = n - 1;
    if (T > ctx) throw new Error(`sequence of ${T} positions exceeds context ${ctx}`);
    this.ensureScratch();
    const acts = this.layerActs!;
    const x0 = this.x0!;
    const logits = this.logits!;
    const hd = d / H;
    const isqrt = 1 / Math.sqrt(hd);

    // embeddings
    const wte = this.w("wte");
    const wpe = this.w("wpe");
    for (let i = 0; i < T; i++) {
      const to = tokens[i] * d;
      const po = i * d;
      for (let c = 0; c < d; c++) x0[po + c] = wte[to + c] + wpe[po + c];
    }

    // blocks
    let x = x0;
    for (let l = 0; l < L; l++) {
      const a = acts[l];
      a.xin.set(x.subarray(0, T * d));
      for (let i = 0; i < T; i++) {
        a.inv1[i] = rmsnormRow(a.xin, i * d, a.n1, i * d, d);
      }
      matmul(a.n1, this.w(`l${l}.wq`), a.q, T, d, d);
      matmul(a.n1, this.w(`l${l}.wk`), a.k, T, d, d);
      matmul(a.n1, this.w(`l${l}.wv`), a.v, T, d, d);

      for (let h = 0; h < H; h++) {
        const ho = h * hd;
        const ao = h * T * T;
        for (let i = 0; i < T; i++) {
          const qo = i * d + ho;
          const row = ao + i * T;
          let maxS = -Infinity;
          for (let j = 0; j <= i; j++) {
            const ko = j * d + ho;
            let s = 0;
            for (let c = 0; c < hd; c++) s += a.q[qo + c] * a.k[ko + c];
            s *= isqrt;
            a.att[row + j] = s;
            if (s > maxS) maxS = s;
          }
          let z = 0;
          for (let j = 0; j <= i; j++) {
            const e = Math.exp(a.att[row + j] - maxS);
            a.att[row + j] = e;
            z += e;
          }
          const invZ = 1 / z;
          for (let j = 0; j <= i; j++) a.att[row + j] *= invZ;
          const mo = i * d + ho;
          for (let c = 0; c < hd; c++) a.mix[mo + c] = 0;
          for (let j = 0; j <= i; j++) {
            const p = a.att[row + j];
            const vo = j * d + ho;
            for (let c = 0; c < hd; c++) a.mix[mo + c] += p * a.v[vo + c];
          }
        }
      }

      // attention projection + residual
      matmul(a.mix, this.w(`l${l}.wo`), a.xmid, T, d, d);
      for (let i = 0; i < T * d; i++) a.xmid[i] += a.xin[i];

      // mlp
      for (let i = 0; i < T; i++) {
        a.inv2[i] = rmsnormRow(a.xmid, i * d, a.n2, i * d, d);
      }
      matmul(a.n2, this.w(`l${l}.w1`), a.hpre, T, d, 4 * d);
      for (let i = 0; i < T * 4 * d; i++) {
        a.hpost[i] = a.hpre[i] > 0 ? a.hpre[i] : 0;
      }
      // write the block output into the next xin (or x0 buffer reuse)
      const out = l + 1 < L ? acts[l + 1].xin : x0;
      matmul(a.hpost, this.w(`l${l}.w2`), out, T, d * 4, d);
      for (let i = 0; i < T * d; i++) out[i] += a.xmid[i];
      x = out;
    }

    // final norm + head
    const invF = this.invF!;
    const nF = this.nF!;
    for (let i = 0; i < T; i++) {
      invF[i] = rmsnormRow(x, i * d, nF, i * d, d);
    }
    matmul(nF, this.w("whead"), logits, T, d, VOCAB_SIZE);

    // softmax cross-entropy; dlogits left in `logits` when withGrad
    let lossSum = 0;
    for (let i = 0; i < T; i++) {
      const lo = i * VOCAB_SIZE;
      let maxV = -Infinity;
      for (let c = 0; c < VOCAB_SIZE; c++) if (logits[lo + c] > maxV) maxV = logits[lo + c];
      let z = 0;
      for (let c = 0; c < VOCAB_SIZE; c++) z += Math.exp(logits[lo + c] - maxV);
      const target = tokens[i + 1];
      const logp = logits[lo + target] - maxV - Math.log(z);
      lossSum += -logp;
      if (withGrad) {
        const invZ = 1 / z;
        for (let c = 0; c < VOCAB_SIZE; c++) {
          logits[lo + c] = (Math.exp(logits[lo + c] - maxV) * invZ) / T;
        }
        logits[lo + target] -= 1 / T;
      }
    }
    const loss = lossSum / T;
    if (!withGrad) return loss;

    // ---- backward ----
    const dx = this.dx!;
    const dh = this.dscratch!;
    dx.fill(0, 0, T * d);

    // head and final norm
    matmulBackW(logits, nF, this.g("whead"), T, d, VOCAB_SIZE);
    // reuse nF as d(normed) scratch
    const dnF = nF;
    dnF.fill(0, 0, T * d);
    matmulBackX(logits, this.w("whead"), dnF, T, d, VOCAB_SIZE);
    const xLast = L > 0 ? x : x0;
    for (let i = 0; i < T; i++) {
      rmsnormBackRow(dnF, i * d, xLast, i * d, invF[i], dx, i * d, d);
    }

    for (let l = L - 1; l >= 0; l--) {
      const a = acts[l];
      // recompute relu input sign from hpre; dx is grad at block output
      // mlp: out = xmid + w2(hpost)
      dh.fill(0, 0, T * 4 * d);
      matmulBackW(dx, a.hpost, this.g(`l${l}.w2`), T, 4 * d, d);
      matmulBackX(dx, this.w(`l${l}.w2`), dh, T, 4 * d, d);
      for (let i = 0; i < T * 4 * d; i++) if (a.hpre[i] <= 0) dh[i] = 0;
      // reuse n2 as d(n2) scratch after saving nothing (n2 itself needed by w1 grad first)
      matmulBackW(dh, a.n2, this.g(`l${l}.w1`), T, d, 4 * d);
      const dn2 = a.n2; // consumed above; safe to overwrite now
      dn2.fill(0, 0, T * d);
      matmulBackX(dh, this.w(`l${l}.w1`), dn2, T, d, 4 * d);
      // dx stays the residual grad into xmid; add norm backprop
      for (let i = 0; i < T; i++) {
        rmsnormBackRow(dn2, i * d, a.xmid, i * d, a.inv2[i], dx, i * d, d);
      }

      // attention: xmid = xin + wo(mix); n1 is still needed for the q/k/v
      // weight grads, so d(mix) borrows the (consumed) mlp scratch instead
      const dmixBuf = dh;
      dmixBuf.fill(0, 0, T * d);
      matmulBackW(dx, a.mix, this.g(`l${l}.wo`), T, d, d);
      matmulBackX(dx, this.w(`l${l}.wo`), dmixBuf, T, d, d);

      // heads backward; dq/dk/dv live in activation buffers already consumed
      const dq = a.mix;
      const dk = a.xmid;
      const dv = a.hpost;
      dq.fill(0, 0, T * d);
      dk.fill(0, 0, T * d);
      dv.fill(0, 0, T * d);
      for (let h = 0; h < H; h++) {
        const ho = h * hd;
        const ao = h * T * T;
        for (let i = 0; i < T; i++) {
          const row = ao + i * T;
          const go = i * d + ho;
          // softmax backward needs dot(p, dA) first; dA is cheap, take two passes
          let dotAG = 0;
          for (let j = 0; j <= i; j++) {
            const vo = j * d + ho;
            let da = 0;
            for (let c = 0; c < hd; c++) da += dmixBuf[go + c] * a.v[vo + c];
            dotAG += a.att[row + j] * da;
          }
          for (let j = 0; j <= i; j++) {
            const vo = j * d + ho;
            let da = 0;
            for (let c = 0; c < hd; c++) da += dmixBuf[go + c] * a.v[vo + c];
            const p = a.att[row + j];
            const ds = p * (da - dotAG) * isqrt;
            for (let c = 0; c < hd; c++) dv[vo + c] += p * dmixBuf[go + c];
            const qo = i * d + ho;
            const ko = j * d + ho;
            for (let c = 0; c < hd; c++) {
              dq[qo + c] += ds * a.k[ko + c];
              dk[ko + c] += ds * a.q[qo + c];
            }
          }
        }
      }

      // q/k/v projections
      matmulBackW(dq, a.n1, this.g(`l${l}.wq`), T, d, d);
      matmulBackW(dk, a.n1, this.g(`l${l}.wk`), T, d, d);
      matmulBackW(dv, a.n1, this.g(`l${l}.wv`), T, d, d);
      const dn1 = a.n1; // weight grads done; safe to overwrite
      dn1.fill(0, 0, T * d);
      matmulBackX(dq, this.w(`l${l}.wq`), dn1, T, d, d);
      matmulBackX(dk, this.w(`l${l}.wk`), dn1, T, d, d);
      matmulBackX(dv, this.w(`l${l}.wv`), dn1, T, d, d);
      // first norm backprop; dx currently holds grad into xmid which equals
      // grad into xin through the residual, so add the norm path on top
      for (let i = 0; i < T; i++) {
        rmsnormBackRow(dn1, i * d, a.xin, i * d, a.inv1[i], dx, i * d, d);
      }
    }

    // embeddings
    const dwte = this.g("wte");
    const dwpe = this.g("wpe");
    for (let i = 0; i < T; i++) {
      const to = tokens[i] * d;
      const po = i * d;
      for (let c = 0; c < d; c++) {
        dwte[to + c] += dx[po + c];
        dwpe[po + c] += dx[po + c];
      }
    }
    return loss;
  }

  lossAndGrad(tokens: Int32Array): number {
    return this.run(tokens, true);
  }

  loss(tokens: Int32Array): number {
    return this.run(tokens, false);
  }

  session(): GenSession {
    return new GenSession(this);
  }

  serialize(): string {
    const bytes = Buffer.from(
      this.params.buffer,
      this.params.byteOffset,
      this.params.byteLength,
    );
    return JSON.stringify({
      format: "trace-trainer-checkpoint",
      version: 1,
      config: this.cfg,
      vocabSize: VOCAB_SIZE,
      params: bytes.toString("base64"),
    });
  }

  static deserialize(text: string): Model {
    const obj = JSON.parse(text);
    if (obj.format !== "trace-trainer-checkpoint" || obj.version !== 1) {
      throw new Error("not a recognizable checkpoint file");
    }
    if (obj.vocabSize !== VOCAB_SIZE) {
      throw new Error(
        `checkpoint vocab ${obj.vocabSize} does not match this build's ${VOCAB_SIZE}`,
      );
    }
    // pooled Buffers need not be 4-byte aligned; copy before viewing
    const raw = Buffer.from(obj.params, "base64");
    const bytes = new Uint8Array(raw.byteLength);
    bytes.set(raw);
    return new Model(obj.config as ModelConfig, new Float32Array(bytes.buffer));
  }
}

export class ContextExhausted extends Error {
  constructor(ctx: number) {
    super(`generation reached the ${ctx}-token context limit`);
  }
}

/** Incremental decoding with a KV cache; one session per generation. */
export class GenSession {
  private readonly model: Model;
  private readonly kCache: Float32Array[];
  private readonly vCache: Float32Array[];
  private readonly x: Float32Array;
  private readonly n1: Float32Array;
  private readonly q: Float32Array;
  private readonly mix: Float32Array;
  private readonly h: Float32Array;
  private readonly probs: Float32Array;
  readonly logits: Float32Array;
  pos = 0;

  constructor(model: Model) {
    this.model = model;
    const { layers, ctx, dim } = model.cfg;
    this.kCache = [];
    this.vCache = [];
    for (let l = 0; l < layers; l++) {
      this.kCache.push(new Float32Array(ctx * dim));
      this.vCache.push(new Float32Array(ctx * dim));
    }
    this.x = new Float32Array(dim);
    this.n1 = new Float32Array(dim);
    this.q = new Float32Array(dim);
    this.mix = new Float32Array(dim);
    this.h = new Float32Array(4 * dim);
    this.probs = new Float32Array(ctx);
    this.logits = new Float32Array(VOCAB_SIZE);
  }

  get remaining(): number {
    return this.model.cfg.ctx - this.pos;
  }

  /** Feed one token; this.logits then predicts the following token. */
  feed(tokenId: number): void {
    const m = this.model;
    const { dim: d, heads: H, layers: L, ctx } = m.cfg;
    if (this.pos >= ctx) throw new ContextExhausted(ctx);
    const hd = d / H;
    const isqrt = 1 / Math.sqrt(hd);
    const p = m.params;
    const t = this.pos;

    const wte = m.block("wte");
    const wpe = m.block("wpe");
    for (let c = 0; c < d; c++) {
      this.x[c] = p[wte.offset + tokenId * d + c] + p[wpe.offset + t * d + c];
    }

    for (let l = 0; l < L; l++) {
      rmsnormRow(this.x, 0, this.n1, 0, d);
      const wq = m.block(`l${l}.wq`).offset;
      const wk = m.block(`l${l}.wk`).offset;
      const wv = m.block(`l${l}.wv`).offset;
      const K = this.kCache[l];
      const V = this.vCache[l];
      for (let j = 0; j < d; j++) {
        let aq = 0, ak = 0, av = 0;
        const ro = j * d;
        for (let c = 0; c < d; c++) {
          const nv = this.n1[c];
          aq += nv * p[wq + ro + c];
          ak += nv * p[wk + ro + c];
          av += nv * p[wv + ro + c];
        }
        this.q[j] = aq;
        K[t * d + j] = ak;
        V[t * d + j] = av;
      }
      for (let h = 0; h < H; h++) {
        const ho = h * hd;
        let maxS = -Infinity;
        for (let j = 0; j <= t; j++) {
          let s = 0;
          const ko = j * d + ho;
          for (let c = 0; c < hd; c++) s += this.q[ho + c] * K[ko + c];
          s *= isqrt;
          this.probs[j] = s;
          if (s > maxS) maxS = s;
        }
        let z = 0;
        for (let j = 0; j <= t; j++) {
          const e = Math.exp(this.probs[j] - maxS);
          this.probs[j] = e;
          z += e;
        }
        const invZ = 1 / z;
        for (let c = 0; c < hd; c++) this.mix[ho + c] = 0;
        for (let j = 0; j <= t; j++) {
          const w = this.probs[j] * invZ;
          const vo = j * d + ho;
          for (let c = 0; c < hd; c++) this.mix[ho + c] += w * V[vo + c];
        }
      }
      const wo = m.block(`l${l}.wo`).offset;
      for (let j = 0; j < d; j++) {
        let acc = 0;
        const ro = wo + j * d;
        for (let c = 0; c < d; c++) acc += this.mix[c] * p[ro + c];
        this.n1[j] = acc;
      }
      for (let c = 0; c < d; c++) this.x[c] += this.n1[c];

      rmsnormRow(this.x, 0, this.n1, 0, d);
      const w1 = m.block(`l${l}.w1`).offset;
      for (let j = 0; j < 4 * d; j++) {
        let acc = 0;
        const ro = w1 + j * d;
        for (let c = 0; c < d; c++) acc += this.n1[c] * p[ro + c];
        this.h[j] = acc > 0 ? acc : 0;
      }
      const w2 = m.block(`l${l}.w2`).offset;
      for (let j = 0; j < d; j++) {
        let acc = 0;
        const ro = w2 + j * 4 * d;
        for (let c = 0; c < 4 * d; c++) acc += this.h[c] * p[ro + c];
        this.x[j] += acc;
      }
    }

    rmsnormRow(this.x, 0, this.n1, 0, d);
    const wh = m.block("whead").offset;
    for (let j = 0; j < VOCAB_SIZE; j++) {
      let acc = 0;
      const ro = wh + j * d;
      for (let c = 0; c < d; c++) acc += this.n1[c] * p[ro + c];
      this.logits[j] = acc;
    }
    this.pos += 1;
  }

  /** Greedy argmax over current logits (lowest id wins ties). */
  argmax(): number {
    let best = 0;
    let bestV = this.logits[0];
    for (let c = 1; c < VOCAB_SIZE; c++) {
      if (this.logits[c] > bestV) {
        bestV = this.logits[c];
        best = c;
      }
    }
    return best;
  }

  /** Temperature sample from current logits. */
  sample(temperature: number, rng: Rng): number {
    if (temperature <= 0) return this.argmax();
    let maxV = -Infinity;
    for (let c = 0; c < VOCAB_SIZE; c++) {
      if (this.logits[c] > maxV) maxV = this.logits[c];
    }
    const weights = new Float64Array(VOCAB_SIZE);
    for (let c = 0; c < VOCAB_SIZE; c++) {
      weights[c] = Math.exp((this.logits[c] - maxV) / temperature);
    }
    return rng.choiceWeighted(weights);
  }
}
