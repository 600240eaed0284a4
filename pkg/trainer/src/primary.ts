/** Subprocess boundary to the searchtrace CLI.
 *
 * Validation, filtering, and data generation all happen on the other side
 * of this file; the trainer only reads the reports back. That keeps a
 * single source of truth for what counts as a well-formed or correct
 * trajectory.
 */

import { execFileSync } from "node:child_process";
import { readFileSync } from "node:fs";

const BIN = process.env.SEARCHTRACE_BIN ?? "searchtrace";

export class ToolkitError extends Error {}

function run(args: string[]): string {
  try {
    return execFileSync(BIN, args, {
      encoding: "utf-8",
      stdio: ["ignore", "pipe", "pipe"],
      maxBuffer: 64 * 1024 * 1024,
    });
  } catch (err) {
    const e = err as { stderr?: string; message: string };
    throw new ToolkitError(
      `${BIN} ${args.join(" ")} failed: ${(e.stderr ?? e.message).trim()}`,
    );
  }
}

export function genProblems(opts: {
  n: number;
  seed: number;
  out: string;
  numInputs?: number;
  split?: string;
}): void {
  const args = [
    "gen-problems",
    "--n", String(opts.n),
    "--seed", String(opts.seed),
    "--out", opts.out,
  ];
  if (opts.numInputs !== undefined) args.push("--num-inputs", String(opts.numInputs));
  if (opts.split !== undefined) args.push("--split", opts.split);
  run(args);
}

export function genDataset(opts: {
  n: number;
  seed: number;
  out: string;
  condition: "sos" | "op";
  numInputs?: number;
  split?: string;
  strategy?: string;
  workers?: number;
}): void {
  const args = [
    "gen-dataset",
    "--n", String(opts.n),
    "--seed", String(opts.seed),
    "--out", opts.out,
    "--condition", opts.condition,
  ];
  if (opts.numInputs !== undefined) args.push("--num-inputs", String(opts.numInputs));
  if (opts.split !== undefined) args.push("--split", opts.split);
  if (opts.strategy !== undefined) args.push("--strategy", opts.strategy);
  if (opts.workers !== undefined) args.push("--workers", String(opts.workers));
  run(args);
}

export interface ValidationReport {
  correct: boolean;
  errors: { formatting: number; arithmetic: number; exploration: number; other: number };
}

export interface ValidateResult {
  n: number;
  accuracy: number;
  accuracyCi: [number, number];
  reports: ValidationReport[];
}

/** Validate rollouts against their problems; returns the parsed report. */
export function validate(opts: {
  problems: string;
  rollouts: string;
  out: string;
}): ValidateResult {
  run([
    "validate",
    "--problems", opts.problems,
    "--rollouts", opts.rollouts,
    "--out", opts.out,
  ]);
  const payload = JSON.parse(readFileSync(opts.out, "utf-8"));
  return {
    n: payload.n,
    accuracy: payload.summary?.accuracy ?? 0,
    accuracyCi: (payload.summary?.accuracy_ci ?? [0, 1]) as [number, number],
    reports: payload.reports as ValidationReport[],
  };
}

/** Fraction of rollouts the toolkit parses with zero formatting errors. */
export function strictParseRate(result: ValidateResult): number {
  if (result.reports.length === 0) return 0;
  const ok = result.reports.filter((r) => r.errors.formatting === 0).length;
  return ok / result.reports.length;
}

/** Keep correct rollouts (the toolkit decides which); returns how many. */
export function starFilter(opts: {
  rollouts: string;
  problems: string;
  out: string;
}): number {
  run([
    "star-filter",
    "--rollouts", opts.rollouts,
    "--problems", opts.problems,
    "--out", opts.out,
  ]);
  const kept = readFileSync(opts.out, "utf-8")
    .split("\n")
    .filter((l) => l.trim() !== "").length;
  return kept;
}
