/** Command line entry points for the trainer. */

import { readFileSync } from "node:fs";
import { parseArgs, ParseArgsConfig } from "node:util";

import { readProblems, writeRecords } from "./data.js";
import { Model, ModelConfig } from "./model.js";
import { rollout } from "./rollout.js";
import { compareConditions } from "./compare.js";
import { evaluate, starLoop } from "./star.js";
import { train } from "./train.js";

type Opts = Record<string, string | boolean | undefined>;

function parse(argv: string[], options: ParseArgsConfig["options"]): Opts {
  return parseArgs({ args: argv, options, allowPositionals: false }).values as Opts;
}

function need(opts: Opts, name: string): string {
  const v = opts[name];
  if (typeof v !== "string" || v === "") throw new Error(`--${name} is required`);
  return v;
}

function num(opts: Opts, name: string, fallback?: number): number {
  const v = opts[name];
  if (v === undefined) {
    if (fallback === undefined) throw new Error(`--${name} is required`);
    return fallback;
  }
  const n = Number(v);
  if (!Number.isFinite(n)) throw new Error(`--${name}: not a number: ${v}`);
  return n;
}

function maybeNum(opts: Opts, name: string): number | undefined {
  return opts[name] === undefined ? undefined : num(opts, name);
}

const MODEL_FLAGS = {
  dim: { type: "string" as const },
  layers: { type: "string" as const },
  heads: { type: "string" as const },
  ctx: { type: "string" as const },
};

function modelConfig(opts: Opts): ModelConfig {
  return {
    dim: num(opts, "dim", 48),
    layers: num(opts, "layers", 2),
    heads: num(opts, "heads", 2),
    ctx: num(opts, "ctx", 512),
  };
}

function loadCheckpoint(path: string): Model {
  return Model.deserialize(readFileSync(path, "utf-8"));
}

function cmdTrain(argv: string[]): void {
  const opts = parse(argv, {
    dataset: { type: "string" },
    condition: { type: "string" },
    seed: { type: "string" },
    epochs: { type: "string" },
    lr: { type: "string" },
    "doc-limit": { type: "string" },
    "fit-context": { type: "boolean" },
    "checkpoint-out": { type: "string" },
    "curve-out": { type: "string" },
    ...MODEL_FLAGS,
  });
  const condition = need(opts, "condition");
  if (condition !== "sos" && condition !== "op") {
    throw new Error(`--condition must be sos or op, got ${condition}`);
  }
  const { curve } = train({
    datasetPath: need(opts, "dataset"),
    condition,
    seed: num(opts, "seed", 0),
    model: modelConfig(opts),
    epochs: num(opts, "epochs", 3),
    docLimit: maybeNum(opts, "doc-limit"),
    fitContext: opts["fit-context"] === true,
    lr: num(opts, "lr", 3e-3),
    checkpointOut: opts["checkpoint-out"] as string | undefined,
    curveOut: opts["curve-out"] as string | undefined,
  });
  const first = curve.epochMeanLoss[0];
  const last = curve.epochMeanLoss[curve.epochMeanLoss.length - 1];
  process.stdout.write(
    `trained ${curve.steps} steps over ${curve.docCount} docs ` +
      `(${curve.truncatedDocs} truncated); epoch loss ${first.toFixed(4)} -> ${last.toFixed(4)}\n`,
  );
}

function cmdRollout(argv: string[]): void {
  const opts = parse(argv, {
    checkpoint: { type: "string" },
    problems: { type: "string" },
    out: { type: "string" },
    temperature: { type: "string" },
    seed: { type: "string" },
    "max-new-tokens": { type: "string" },
  });
  const model = loadCheckpoint(need(opts, "checkpoint"));
  const problems = readProblems(need(opts, "problems"));
  const batch = rollout(model, problems, {
    temperature: num(opts, "temperature", 0.8),
    seed: num(opts, "seed", 0),
    maxNewTokens: maybeNum(opts, "max-new-tokens"),
  });
  writeRecords(need(opts, "out"), batch.records);
  process.stdout.write(JSON.stringify(batch.meta) + "\n");
}

function cmdEval(argv: string[]): void {
  const opts = parse(argv, {
    checkpoint: { type: "string" },
    problems: { type: "string" },
    "out-prefix": { type: "string" },
    "max-new-tokens": { type: "string" },
  });
  const model = loadCheckpoint(need(opts, "checkpoint"));
  const problemsPath = need(opts, "problems");
  const result = evaluate(
    model,
    readProblems(problemsPath),
    problemsPath,
    need(opts, "out-prefix"),
    maybeNum(opts, "max-new-tokens"),
  );
  process.stdout.write(JSON.stringify(result) + "\n");
}

function cmdStar(argv: string[]): void {
  const opts = parse(argv, {
    checkpoint: { type: "string" },
    "train-problems": { type: "string" },
    "val-problems": { type: "string" },
    "out-dir": { type: "string" },
    iterations: { type: "string" },
    temperature: { type: "string" },
    seed: { type: "string" },
    epochs: { type: "string" },
    lr: { type: "string" },
    "max-new-tokens": { type: "string" },
  });
  const outcome = starLoop({
    base: loadCheckpoint(need(opts, "checkpoint")),
    trainProblems: readProblems(need(opts, "train-problems")),
    valProblemsPath: need(opts, "val-problems"),
    outDir: need(opts, "out-dir"),
    iterations: num(opts, "iterations", 1),
    seed: num(opts, "seed", 0),
    temperature: maybeNum(opts, "temperature"),
    maxNewTokens: maybeNum(opts, "max-new-tokens"),
    finetune: { epochs: num(opts, "epochs", 2), lr: num(opts, "lr", 1e-3) },
  });
  process.stdout.write(JSON.stringify(outcome, null, 2) + "\n");
}

function cmdCompare(argv: string[]): void {
  const opts = parse(argv, {
    "out-dir": { type: "string" },
    seed: { type: "string" },
    n: { type: "string" },
    "val-n": { type: "string" },
    "num-inputs": { type: "string" },
    epochs: { type: "string" },
    lr: { type: "string" },
    "doc-limit": { type: "string" },
    "max-new-tokens": { type: "string" },
    ...MODEL_FLAGS,
  });
  const outcome = compareConditions({
    outDir: need(opts, "out-dir"),
    seed: num(opts, "seed", 0),
    n: num(opts, "n"),
    valN: num(opts, "val-n"),
    numInputs: maybeNum(opts, "num-inputs"),
    model: modelConfig(opts),
    epochs: num(opts, "epochs", 3),
    lr: num(opts, "lr", 3e-3),
    docLimit: maybeNum(opts, "doc-limit"),
    maxNewTokens: maybeNum(opts, "max-new-tokens"),
  });
  process.stdout.write(JSON.stringify(outcome, null, 2) + "\n");
}

const COMMANDS: Record<string, (argv: string[]) => void> = {
  train: cmdTrain,
  rollout: cmdRollout,
  eval: cmdEval,
  star: cmdStar,
  compare: cmdCompare,
};

export function main(argv: string[]): number {
  const [cmd, ...rest] = argv;
  const handler = cmd === undefined ? undefined : COMMANDS[cmd];
  if (handler === undefined) {
    process.stderr.write(
      `usage: trace-trainer <${Object.keys(COMMANDS).join("|")}> [options]\n`,
    );
    return 2;
  }
  try {
    handler(rest);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) process.exitCode = main(process.argv.slice(2));
