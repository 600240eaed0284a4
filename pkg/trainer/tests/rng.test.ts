import { describe, expect, it } from "vitest";

import { Rng, deriveSeed } from "../src/rng.js";

describe("Rng", () => {
  it("replays the same sequence for the same seed", () => {
    const a = new Rng(1234);
    const b = new Rng(1234);
    for (let i = 0; i < 200; i++) expect(a.u32()).toBe(b.u32());
    for (let i = 0; i < 50; i++) expect(a.gauss()).toBe(b.gauss());
  });

  it("diverges for adjacent seeds", () => {
    const a = new Rng(7);
    const b = new Rng(8);
    let same = 0;
    for (let i = 0; i < 32; i++) if (a.u32() === b.u32()) same += 1;
    expect(same).toBe(0);
  });

  it("keeps float in [0,1) and int in [0,n)", () => {
    const r = new Rng(99);
    for (let i = 0; i < 5000; i++) {
      const f = r.float();
      expect(f).toBeGreaterThanOrEqual(0);
      expect(f).toBeLessThan(1);
      const k = r.int(13);
      expect(k).toBeGreaterThanOrEqual(0);
      expect(k).toBeLessThan(13);
      expect(Number.isInteger(k)).toBe(true);
    }
  });

  it("draws roughly standard-normal samples", () => {
    const r = new Rng(5);
    const n = 20000;
    let sum = 0;
    let sq = 0;
    for (let i = 0; i < n; i++) {
      const g = r.gauss();
      sum += g;
      sq += g * g;
    }
    const mean = sum / n;
    const variance = sq / n - mean * mean;
    expect(Math.abs(mean)).toBeLessThan(0.05);
    expect(Math.abs(variance - 1)).toBeLessThan(0.1);
  });

  it("shuffles into a deterministic permutation", () => {
    const base = Array.from({ length: 30 }, (_, i) => i);
    const x = base.slice();
    const y = base.slice();
    new Rng(42).shuffle(x);
    new Rng(42).shuffle(y);
    expect(x).toEqual(y);
    expect(x.slice().sort((p, q) => p - q)).toEqual(base);
    expect(x).not.toEqual(base);
  });

  it("never picks a zero-weight index", () => {
    const r = new Rng(3);
    for (let i = 0; i < 1000; i++) {
      const pick = r.choiceWeighted([0, 1, 0, 2, 0]);
      expect([1, 3]).toContain(pick);
    }
  });
});

describe("deriveSeed", () => {
  it("is stable and sensitive to every part", () => {
    expect(deriveSeed(11, "docs")).toBe(deriveSeed(11, "docs"));
    expect(deriveSeed(11, "docs")).not.toBe(deriveSeed(12, "docs"));
    expect(deriveSeed(11, "docs")).not.toBe(deriveSeed(11, "order"));
    expect(deriveSeed(11, "rollout", 1)).not.toBe(deriveSeed(11, "rollout", 2));
  });

  it("returns a uint32", () => {
    const s = deriveSeed(0, "x");
    expect(s).toBeGreaterThanOrEqual(0);
    expect(s).toBeLessThanOrEqual(0xffffffff);
    expect(Number.isInteger(s)).toBe(true);
  });
});
