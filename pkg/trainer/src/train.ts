/** Training loop: next-character prediction over trajectory text. */

import { writeFileSync } from "node:fs";

import { DatasetRecord, readDataset, SchemaMismatch } from "./data.js";
import { Model, ModelConfig } from "./model.js";
import { deriveSeed, Rng } from "./rng.js";
import { adamInit, adamStep } from "./tensor.js";
import { encodeDocument, UnknownCharacter } from "./vocab.js";

export interface TrainConfig {
  datasetPath: string;
  condition: "sos" | "op";
  seed: number;
  model: ModelConfig;
  epochs: number;
  /** Train on this many documents (seeded sample); whole file if absent. */
  docLimit?: number;
  /** Keep only documents that fit the context window, so every trace is
   * seen whole (and no truncation happens). Off by default. */
  fitContext?: boolean;
  lr: number;
  checkpointOut?: string;
  curveOut?: string;
}

export interface TrainCurve {
  steps: number;
  epochs: number;
  stepLosses: number[];
  epochMeanLoss: number[];
  truncatedDocs: number;
  docCount: number;
}

export interface TrainOutcome {
  model: Model;
  curve: TrainCurve;
  /** The documents actually trained on, in sampling order. */
  records: DatasetRecord[];
}

/** Dataset records to token arrays; unknown characters are a schema error. */
export function encodeRecords(records: DatasetRecord[]): Int32Array[] {
  return records.map((r, i) => {
    try {
      return encodeDocument(r.trajectory);
    } catch (err) {
      if (err instanceof UnknownCharacter) {
        throw new SchemaMismatch(`record ${i}: ${err.message}`);
      }
      throw err;
    }
  });
}

/** Seeded choice of which documents a run trains on. */
export function pickDocs<T>(items: T[], limit: number | undefined, seed: number): T[] {
  if (limit === undefined || limit >= items.length) return items.slice();
  const idx = items.map((_, i) => i);
  new Rng(deriveSeed(seed, "docs")).shuffle(idx);
  return idx.slice(0, limit).map((i) => items[i]);
}

/**
 * Optimize the model on the given token documents, one document per step,
 * reshuffled each epoch. Documents longer than the context window train on
 * their first `ctx` positions (counted in the curve as truncations).
 */
export function runTraining(
  model: Model,
  docs: Int32Array[],
  opts: { epochs: number; lr: number; seed: number; onStep?: (step: number, loss: number) => void },
): TrainCurve {
  if (docs.length === 0) throw new SchemaMismatch("no documents to train on");
  const ctx = model.cfg.ctx;
  const adam = adamInit(model.size);
  const order = docs.map((_, i) => i);
  const shuffler = new Rng(deriveSeed(opts.seed, "order"));
  const totalSteps = opts.epochs * docs.length;

  const stepLosses: number[] = [];
  const epochMeanLoss: number[] = [];
  let truncated = 0;
  let step = 0;
  for (let epoch = 0; epoch < opts.epochs; epoch++) {
    shuffler.shuffle(order);
    let epochSum = 0;
    for (const di of order) {
      let tokens = docs[di];
      if (tokens.length - 1 > ctx) {
        tokens = tokens.subarray(0, ctx + 1);
        truncated += 1;
      }
      const loss = model.lossAndGrad(tokens);
      const lr = opts.lr * (1 - step / totalSteps);
      adamStep(model.params, model.grads, adam, lr);
      stepLosses.push(loss);
      epochSum += loss;
      opts.onStep?.(step, loss);
      step += 1;
    }
    epochMeanLoss.push(epochSum / docs.length);
  }
  return {
    steps: step,
    epochs: opts.epochs,
    stepLosses,
    epochMeanLoss,
    truncatedDocs: truncated,
    docCount: docs.length,
  };
}

/** Records whose BOS+text+EOS encoding fits in ctx positions. */
export function fittingRecords(records: DatasetRecord[], ctx: number): DatasetRecord[] {
  return records.filter((r) => r.trajectory.length + 1 <= ctx);
}

/** Full run from a config: load, sample, train, write artifacts. */
export function train(cfg: TrainConfig): TrainOutcome {
  let pool = readDataset(cfg.datasetPath);
  if (cfg.fitContext) pool = fittingRecords(pool, cfg.model.ctx);
  const records = pickDocs(pool, cfg.docLimit, cfg.seed);
  const docs = encodeRecords(records);
  const model = Model.init(cfg.model, deriveSeed(cfg.seed, "init"));
  const curve = runTraining(model, docs, {
    epochs: cfg.epochs,
    lr: cfg.lr,
    seed: cfg.seed,
  });
  if (cfg.checkpointOut) writeFileSync(cfg.checkpointOut, model.serialize(), "utf-8");
  if (cfg.curveOut) {
    writeFileSync(
      cfg.curveOut,
      JSON.stringify({ config: { ...cfg, model: cfg.model }, curve }, null, 2) + "\n",
      "utf-8",
    );
  }
  return { model, curve, records };
}
