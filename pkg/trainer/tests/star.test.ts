import { existsSync, mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { readProblems } from "../src/data.js";
import { Model } from "../src/model.js";
import { genProblems } from "../src/primary.js";
import { EmptyFilteredSet, starLoop } from "../src/star.js";

const dir = mkdtempSync(join(tmpdir(), "star-"));
const trainPath = join(dir, "train.jsonl");
const valPath = join(dir, "val.jsonl");

beforeAll(() => {
  genProblems({ n: 6, seed: 17, out: trainPath, numInputs: 3 });
  genProblems({ n: 4, seed: 18, out: valPath, numInputs: 3 });
});
afterAll(() => rmSync(dir, { recursive: true, force: true }));

describe("starLoop", () => {
  it("aborts with a diagnostic when no rollout survives the filter", () => {
    // an untrained model produces babble; the filter keeps none of it
    const base = Model.init({ dim: 16, layers: 1, heads: 2, ctx: 96 }, 3);
    const outDir = join(dir, "run1");
    let caught: unknown;
    try {
      starLoop({
        base,
        trainProblems: readProblems(trainPath),
        valProblemsPath: valPath,
        outDir,
        iterations: 1,
        seed: 21,
        finetune: { epochs: 1, lr: 1e-3 },
      });
    } catch (err) {
      caught = err;
    }
    expect(caught).toBeInstanceOf(EmptyFilteredSet);
    const msg = (caught as Error).message;
    expect(msg).toContain("iteration 1");
    expect(msg).toContain("6");

    // the run leaves its evidence behind: baseline eval, the sampled
    // rollouts, and the batch metadata with the sampling temperature
    expect(existsSync(join(outDir, "base.eval.report.json"))).toBe(true);
    expect(existsSync(join(outDir, "iter1.rollouts.jsonl"))).toBe(true);
    const meta = JSON.parse(readFileSync(join(outDir, "iter1.meta.json"), "utf-8"));
    expect(meta.temperature).toBe(0.8);
  }, 120_000);

  it("writes one rollout per training problem before filtering", () => {
    const base = Model.init({ dim: 16, layers: 1, heads: 2, ctx: 96 }, 3);
    const outDir = join(dir, "run2");
    try {
      starLoop({
        base,
        trainProblems: readProblems(trainPath),
        valProblemsPath: valPath,
        outDir,
        iterations: 1,
        seed: 22,
        temperature: 0.9,
        finetune: { epochs: 1, lr: 1e-3 },
      });
    } catch (err) {
      expect(err).toBeInstanceOf(EmptyFilteredSet);
    }
    const lines = readFileSync(join(outDir, "iter1.rollouts.jsonl"), "utf-8")
      .trim()
      .split("\n");
    expect(lines).toHaveLength(6);
    const first = JSON.parse(lines[0]);
    expect(first.temperature).toBe(0.9);
    expect(typeof first.trajectory).toBe("string");
  }, 120_000);
});
