import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { readDataset } from "../src/data.js";
import { compareConditions } from "../src/compare.js";

const dir = mkdtempSync(join(tmpdir(), "compare-"));
afterAll(() => rmSync(dir, { recursive: true, force: true }));

describe("compareConditions", () => {
  it("trains both conditions on aligned problems with one step budget", () => {
    const outDir = join(dir, "run");
    const outcome = compareConditions({
      outDir,
      seed: 29,
      n: 40,
      valN: 5,
      numInputs: 3,
      model: { dim: 16, layers: 1, heads: 2, ctx: 128 },
      epochs: 1,
      lr: 2e-3,
      maxNewTokens: 60,
    });

    // the generator draws the same problem sequence for both conditions
    const sos = readDataset(join(outDir, "sos.jsonl"));
    const op = readDataset(join(outDir, "op.jsonl"));
    expect(sos.map((r) => `${r.target}:${r.nums.join(",")}`)).toEqual(
      op.map((r) => `${r.target}:${r.nums.join(",")}`),
    );
    // same problems, different trajectory text
    expect(sos[0].trajectory).not.toBe(op[0].trajectory);

    expect(outcome.steps).toBe(40);
    expect(outcome.docCount).toBe(40);
    expect(["sos", "op", "tie"]).toContain(outcome.direction);
    expect(outcome.sos.evaluation.n).toBe(5);
    expect(outcome.op.evaluation.n).toBe(5);
    expect(outcome.sos.meanLossLastEpoch).toBeGreaterThan(0);

    const onDisk = JSON.parse(readFileSync(join(outDir, "compare.json"), "utf-8"));
    expect(onDisk.direction).toBe(outcome.direction);
  }, 300_000);
});
