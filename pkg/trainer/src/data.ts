/** JSON-lines I/O shared with the toolkit.
 *
 * The trainer reads and writes the toolkit's record schema and nothing
 * else: trajectory text is opaque training data here, never re-parsed.
 * The single exception is the prompt, whose exact shape (the opening
 * Current State line) is part of the rollout contract.
 */

import { readFileSync, writeFileSync } from "node:fs";

export interface Problem {
  target: number;
  nums: number[];
  split: string;
}

export interface DatasetRecord extends Problem {
  trajectory: string;
  strategy?: string;
  correct?: boolean;
  states_explored?: number;
  seed?: number;
}

export interface RolloutRecord extends DatasetRecord {
  temperature: number;
  truncated: boolean;
}

export class SchemaMismatch extends Error {}

function parseLines(path: string): unknown[] {
  const out: unknown[] = [];
  const raw = readFileSync(path, "utf-8");
  let lineNo = 0;
  for (const line of raw.split("\n")) {
    lineNo += 1;
    if (line.trim() === "") continue;
    try {
      out.push(JSON.parse(line));
    } catch {
      throw new SchemaMismatch(`${path}:${lineNo}: not valid JSON`);
    }
  }
  return out;
}

function asProblem(obj: unknown, where: string): Problem {
  const o = obj as Record<string, unknown>;
  if (
    typeof o !== "object" ||
    o === null ||
    typeof o.target !== "number" ||
    !Array.isArray(o.nums)
  ) {
    throw new SchemaMismatch(`${where}: record needs numeric target and nums list`);
  }
  return {
    target: o.target,
    nums: o.nums.map((v) => {
      if (typeof v !== "number") throw new SchemaMismatch(`${where}: non-numeric input`);
      return v;
    }),
    split: typeof o.split === "string" ? o.split : "train",
  };
}

export function readProblems(path: string): Problem[] {
  return parseLines(path).map((obj, i) => asProblem(obj, `${path}:${i + 1}`));
}

export function readDataset(path: string): DatasetRecord[] {
  return parseLines(path).map((obj, i) => {
    const where = `${path}:${i + 1}`;
    const problem = asProblem(obj, where);
    const o = obj as Record<string, unknown>;
    if (typeof o.trajectory !== "string") {
      throw new SchemaMismatch(`${where}: record has no trajectory text`);
    }
    return {
      ...problem,
      trajectory: o.trajectory,
      strategy: typeof o.strategy === "string" ? o.strategy : undefined,
      correct: typeof o.correct === "boolean" ? o.correct : undefined,
    };
  });
}

export function writeRecords(path: string, records: DatasetRecord[]): void {
  const lines = records.map((r) =>
    JSON.stringify({
      target: r.target,
      nums: r.nums,
      split: r.split,
      strategy: r.strategy ?? "model",
      correct: r.correct ?? false,
      trajectory: r.trajectory,
      states_explored: r.states_explored ?? 0,
      seed: r.seed ?? 0,
      ...(r as Partial<RolloutRecord>).temperature !== undefined
        ? {
            temperature: (r as RolloutRecord).temperature,
            truncated: (r as RolloutRecord).truncated,
          }
        : {},
    }),
  );
  writeFileSync(path, lines.join("\n") + "\n", "utf-8");
}

/** The rollout prompt: the trace's opening line for this problem. */
export function promptFor(problem: Problem): string {
  return `Current State: ${problem.target}:[${problem.nums.join(", ")}], Operations: []`;
}

/** Drop a trailing partial line; with no newline at all, returns null. */
export function cutAtLastNewline(text: string): string | null {
  const idx = text.lastIndexOf("\n");
  if (idx < 0) return null;
  return text.slice(0, idx);
}
