/** Expert iteration: sample, keep what the toolkit verifies, finetune.
 *
 * Each iteration finetunes a fresh copy of the base model on that
 * iteration's filtered rollouts, then measures validation accuracy with
 * the toolkit's validator. The trainer never judges a trajectory itself.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { Problem, readDataset, readProblems, writeRecords } from "./data.js";
import { Model } from "./model.js";
import { starFilter, strictParseRate, validate, ValidateResult } from "./primary.js";
import { rollout } from "./rollout.js";
import { deriveSeed } from "./rng.js";
import { encodeRecords, runTraining } from "./train.js";

export class EmptyFilteredSet extends Error {
  constructor(iteration: number, rollouts: number) {
    super(
      `iteration ${iteration}: none of the ${rollouts} sampled rollouts ` +
        `survived the correctness filter, nothing to finetune on`,
    );
  }
}

export interface StarConfig {
  base: Model;
  trainProblems: Problem[];
  valProblemsPath: string;
  outDir: string;
  iterations: number;
  seed: number;
  temperature?: number;
  maxNewTokens?: number;
  finetune: { epochs: number; lr: number };
}

export interface EvalResult {
  accuracy: number;
  accuracyCi: [number, number];
  parseRate: number;
  n: number;
}

export interface IterationStats {
  iteration: number;
  rollouts: number;
  kept: number;
  evaluation: EvalResult;
  /** Validation accuracy relative to the pre-loop baseline. */
  accuracyDelta: number;
}

export interface StarOutcome {
  baseline: EvalResult;
  iterations: IterationStats[];
}

function summarize(result: ValidateResult): EvalResult {
  return {
    accuracy: result.accuracy,
    accuracyCi: result.accuracyCi,
    parseRate: strictParseRate(result),
    n: result.n,
  };
}

/** Greedy rollouts on a problems file, judged by the toolkit. */
export function evaluate(
  model: Model,
  valProblems: Problem[],
  valProblemsPath: string,
  outPrefix: string,
  maxNewTokens?: number,
): EvalResult {
  const batch = rollout(model, valProblems, {
    temperature: 0,
    seed: 0,
    maxNewTokens,
  });
  const rolloutsPath = `${outPrefix}.rollouts.jsonl`;
  writeRecords(rolloutsPath, batch.records);
  const report = validate({
    problems: valProblemsPath,
    rollouts: rolloutsPath,
    out: `${outPrefix}.report.json`,
  });
  return summarize(report);
}

export function starLoop(cfg: StarConfig): StarOutcome {
  mkdirSync(cfg.outDir, { recursive: true });
  const temperature = cfg.temperature ?? 0.8;
  const vals = readProblems(cfg.valProblemsPath);

  const baseline = evaluate(
    cfg.base,
    vals,
    cfg.valProblemsPath,
    join(cfg.outDir, "base.eval"),
    cfg.maxNewTokens,
  );

  const stats: IterationStats[] = [];
  // sampling model advances each iteration; finetuning restarts from base
  let current = cfg.base;
  const keptDocs: Int32Array[] = [];
  for (let it = 1; it <= cfg.iterations; it++) {
    const batch = rollout(current, cfg.trainProblems, {
      temperature,
      seed: deriveSeed(cfg.seed, "star", it),
      maxNewTokens: cfg.maxNewTokens,
    });
    const rolloutsPath = join(cfg.outDir, `iter${it}.rollouts.jsonl`);
    const problemsPath = join(cfg.outDir, `iter${it}.problems.jsonl`);
    writeRecords(rolloutsPath, batch.records);
    writeFileSync(
      problemsPath,
      cfg.trainProblems
        .map((p) => JSON.stringify({ target: p.target, nums: p.nums, split: p.split }))
        .join("\n") + "\n",
      "utf-8",
    );
    writeFileSync(
      join(cfg.outDir, `iter${it}.meta.json`),
      JSON.stringify(batch.meta, null, 2) + "\n",
      "utf-8",
    );

    const keptPath = join(cfg.outDir, `iter${it}.kept.jsonl`);
    const kept = starFilter({
      rollouts: rolloutsPath,
      problems: problemsPath,
      out: keptPath,
    });
    if (kept === 0) throw new EmptyFilteredSet(it, batch.records.length);

    // finetune a fresh copy of the base weights on everything kept so far
    keptDocs.push(...encodeRecords(readDataset(keptPath)));
    const tuned = Model.deserialize(cfg.base.serialize());
    runTraining(tuned, keptDocs, {
      epochs: cfg.finetune.epochs,
      lr: cfg.finetune.lr,
      seed: deriveSeed(cfg.seed, "finetune", it),
    });
    current = tuned;
    writeFileSync(join(cfg.outDir, `iter${it}.ckpt.json`), tuned.serialize(), "utf-8");

    const evaluation = evaluate(
      tuned,
      vals,
      cfg.valProblemsPath,
      join(cfg.outDir, `iter${it}.eval`),
      cfg.maxNewTokens,
    );
    stats.push({
      iteration: it,
      rollouts: batch.records.length,
      kept,
      evaluation,
      accuracyDelta: evaluation.accuracy - baseline.accuracy,
    });
  }

  const outcome = { baseline, iterations: stats };
  writeFileSync(
    join(cfg.outDir, "stats.json"),
    JSON.stringify(outcome, null, 2) + "\n",
    "utf-8",
  );
  return outcome;
}
