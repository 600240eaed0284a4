/** Search-trace vs direct-path training, matched everywhere else.
 *
 * Both datasets come from the same generator seed, so they cover the same
 * problem sequence; the only difference is what the trajectory text shows
 * the model. Same init, same step budget, same validation problems. The
 * report states which condition scored higher, nothing stronger.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { readDataset, readProblems } from "./data.js";
import { Model, ModelConfig } from "./model.js";
import { genDataset, genProblems } from "./primary.js";
import { deriveSeed } from "./rng.js";
import { EvalResult, evaluate } from "./star.js";
import { encodeRecords, pickDocs, runTraining } from "./train.js";

export class MisalignedConditions extends Error {}

export interface CompareConfig {
  outDir: string;
  seed: number;
  n: number;
  valN: number;
  numInputs?: number;
  model: ModelConfig;
  epochs: number;
  lr: number;
  docLimit?: number;
  maxNewTokens?: number;
}

export interface ConditionResult {
  meanLossFirstEpoch: number;
  meanLossLastEpoch: number;
  evaluation: EvalResult;
}

export interface CompareOutcome {
  steps: number;
  docCount: number;
  sos: ConditionResult;
  op: ConditionResult;
  direction: "sos" | "op" | "tie";
}

function trainCondition(
  cfg: CompareConfig,
  datasetPath: string,
  valProblemsPath: string,
  prefix: string,
): ConditionResult & { steps: number; docCount: number } {
  // identical seeds on both sides: same init, same doc subset indices,
  // same epoch shuffles, so the trajectory text is the only variable
  const records = pickDocs(readDataset(datasetPath), cfg.docLimit, cfg.seed);
  const docs = encodeRecords(records);
  const model = Model.init(cfg.model, deriveSeed(cfg.seed, "init"));
  const curve = runTraining(model, docs, {
    epochs: cfg.epochs,
    lr: cfg.lr,
    seed: cfg.seed,
  });
  const valProblems = readProblems(valProblemsPath);
  const evaluation = evaluate(
    model,
    valProblems,
    valProblemsPath,
    join(cfg.outDir, prefix),
    cfg.maxNewTokens,
  );
  return {
    meanLossFirstEpoch: curve.epochMeanLoss[0],
    meanLossLastEpoch: curve.epochMeanLoss[curve.epochMeanLoss.length - 1],
    evaluation,
    steps: curve.steps,
    docCount: curve.docCount,
  };
}

export function compareConditions(cfg: CompareConfig): CompareOutcome {
  mkdirSync(cfg.outDir, { recursive: true });
  const sosPath = join(cfg.outDir, "sos.jsonl");
  const opPath = join(cfg.outDir, "op.jsonl");
  const valPath = join(cfg.outDir, "val.jsonl");

  genDataset({ n: cfg.n, seed: cfg.seed, out: sosPath, condition: "sos", numInputs: cfg.numInputs });
  genDataset({ n: cfg.n, seed: cfg.seed, out: opPath, condition: "op", numInputs: cfg.numInputs });
  genProblems({ n: cfg.valN, seed: cfg.seed, out: valPath, numInputs: cfg.numInputs, split: "val" });

  const sosRecords = readDataset(sosPath);
  const opRecords = readDataset(opPath);
  if (sosRecords.length !== opRecords.length) {
    throw new MisalignedConditions(
      `dataset sizes differ: ${sosRecords.length} vs ${opRecords.length}`,
    );
  }
  for (let i = 0; i < sosRecords.length; i++) {
    const a = sosRecords[i];
    const b = opRecords[i];
    if (a.target !== b.target || a.nums.join(",") !== b.nums.join(",")) {
      throw new MisalignedConditions(
        `record ${i}: ${a.target}:[${a.nums}] vs ${b.target}:[${b.nums}]`,
      );
    }
  }

  const sos = trainCondition(cfg, sosPath, valPath, "sos.eval");
  const op = trainCondition(cfg, opPath, valPath, "op.eval");
  if (sos.steps !== op.steps) {
    throw new MisalignedConditions(`step budgets differ: ${sos.steps} vs ${op.steps}`);
  }

  const direction =
    sos.evaluation.accuracy > op.evaluation.accuracy
      ? "sos"
      : op.evaluation.accuracy > sos.evaluation.accuracy
        ? "op"
        : "tie";
  const outcome: CompareOutcome = {
    steps: sos.steps,
    docCount: sos.docCount,
    sos: { meanLossFirstEpoch: sos.meanLossFirstEpoch, meanLossLastEpoch: sos.meanLossLastEpoch, evaluation: sos.evaluation },
    op: { meanLossFirstEpoch: op.meanLossFirstEpoch, meanLossLastEpoch: op.meanLossLastEpoch, evaluation: op.evaluation },
    direction,
  };
  writeFileSync(
    join(cfg.outDir, "compare.json"),
    JSON.stringify(outcome, null, 2) + "\n",
    "utf-8",
  );
  return outcome;
}
