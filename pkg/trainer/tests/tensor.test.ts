import { describe, expect, it } from "vitest";

import { Rng } from "../src/rng.js";
import {
  adamInit,
  adamStep,
  matmul,
  matmulBackW,
  matmulBackX,
} from "../src/tensor.js";

function randArray(n: number, rng: Rng): Float32Array {
  const out = new Float32Array(n);
  for (let i = 0; i < n; i++) out[i] = rng.gauss();
  return out;
}

// plain triple loop, no unrolling: the reference the kernels must match
function naiveMatmul(
  X: Float32Array,
  W: Float32Array,
  T: number,
  din: number,
  dout: number,
): Float64Array {
  const Y = new Float64Array(T * dout);
  for (let i = 0; i < T; i++)
    for (let j = 0; j < dout; j++) {
      let acc = 0;
      for (let k = 0; k < din; k++) acc += X[i * din + k] * W[j * din + k];
      Y[i * dout + j] = acc;
    }
  return Y;
}

describe("matmul", () => {
  it("matches the naive product, including non-multiple-of-4 widths", () => {
    const rng = new Rng(1);
    for (const [T, din, dout] of [
      [3, 8, 5],
      [5, 7, 9],
      [1, 1, 1],
      [4, 13, 6],
    ] as const) {
      const X = randArray(T * din, rng);
      const W = randArray(dout * din, rng);
      const Y = new Float32Array(T * dout);
      matmul(X, W, Y, T, din, dout);
      const ref = naiveMatmul(X, W, T, din, dout);
      for (let i = 0; i < Y.length; i++) {
        expect(Math.abs(Y[i] - ref[i])).toBeLessThan(1e-4);
      }
    }
  });
});

describe("matmul backward", () => {
  // for s = sum(R . Y) with Y = X W^T: ds/dX = R W, ds/dW = R^T X
  it("computes input and weight gradients consistent with the forward", () => {
    const rng = new Rng(2);
    const T = 4,
      din = 7,
      dout = 5;
    const X = randArray(T * din, rng);
    const W = randArray(dout * din, rng);
    const R = randArray(T * dout, rng);

    const dX = new Float32Array(T * din);
    const dW = new Float32Array(dout * din);
    matmulBackX(R, W, dX, T, din, dout);
    matmulBackW(R, X, dW, T, din, dout);

    const eps = 1e-3;
    const score = (Xv: Float32Array, Wv: Float32Array) => {
      const Y = new Float32Array(T * dout);
      matmul(Xv, Wv, Y, T, din, dout);
      let s = 0;
      for (let i = 0; i < Y.length; i++) s += R[i] * Y[i];
      return s;
    };

    for (const idx of [0, 3, T * din - 1]) {
      const Xp = X.slice();
      const Xm = X.slice();
      Xp[idx] += eps;
      Xm[idx] -= eps;
      const fd = (score(Xp, W) - score(Xm, W)) / (2 * eps);
      expect(Math.abs(dX[idx] - fd)).toBeLessThan(1e-2);
    }
    for (const idx of [0, 11, dout * din - 1]) {
      const Wp = W.slice();
      const Wm = W.slice();
      Wp[idx] += eps;
      Wm[idx] -= eps;
      const fd = (score(X, Wp) - score(X, Wm)) / (2 * eps);
      expect(Math.abs(dW[idx] - fd)).toBeLessThan(1e-2);
    }
  });

  it("accumulates instead of overwriting", () => {
    const rng = new Rng(3);
    const T = 2,
      din = 4,
      dout = 3;
    const X = randArray(T * din, rng);
    const W = randArray(dout * din, rng);
    const R = randArray(T * dout, rng);
    const once = new Float32Array(T * din);
    const twice = new Float32Array(T * din);
    matmulBackX(R, W, once, T, din, dout);
    matmulBackX(R, W, twice, T, din, dout);
    matmulBackX(R, W, twice, T, din, dout);
    for (let i = 0; i < once.length; i++) {
      expect(Math.abs(twice[i] - 2 * once[i])).toBeLessThan(1e-5);
    }
  });
});

describe("adamStep", () => {
  it("walks a quadratic to its minimum", () => {
    const params = new Float32Array([5]);
    const grads = new Float32Array(1);
    const state = adamInit(1);
    for (let i = 0; i < 2000; i++) {
      grads[0] = 2 * params[0]; // d/dx of x^2
      adamStep(params, grads, state, 0.01);
    }
    expect(Math.abs(params[0])).toBeLessThan(0.01);
  });

  it("zeroes the gradient buffer after a step", () => {
    const params = new Float32Array([1, 2]);
    const grads = new Float32Array([0.5, -0.5]);
    adamStep(params, grads, adamInit(2), 0.001);
    expect(grads[0]).toBe(0);
    expect(grads[1]).toBe(0);
  });

  it("clips the global gradient norm", () => {
    // with a gigantic gradient the first update is still ~lr in size,
    // because the clipped gradient feeds m/sqrt(v) which is +-1 at step 1
    const params = new Float32Array([0]);
    const grads = new Float32Array([1e9]);
    adamStep(params, grads, adamInit(1), 0.01);
    expect(Math.abs(params[0])).toBeLessThan(0.011);
    expect(Math.abs(params[0])).toBeGreaterThan(0.009);
  });
});
