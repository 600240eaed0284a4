/** Flat Float32Array kernels for the training loop.
 *
 * Weights are stored [out, in] row-major so the forward pass, the input
 * gradient, and the weight gradient are all contiguous row walks; the inner
 * loops are unrolled by four, which is what V8 wants.
 */

/** Y[T,dout] = X[T,din] . W[dout,din]^T */
export function matmul(
  X: Float32Array,
  W: Float32Array,
  Y: Float32Array,
  T: number,
  din: number,
  dout: number,
): void {
  for (let i = 0; i < T; i++) {
    const xo = i * din;
    const yo = i * dout;
    for (let j = 0; j < dout; j++) {
      const wo = j * din;
      let a0 = 0, a1 = 0, a2 = 0, a3 = 0;
      let k = 0;
      for (; k + 3 < din; k += 4) {
        a0 += X[xo + k] * W[wo + k];
        a1 += X[xo + k + 1] * W[wo + k + 1];
        a2 += X[xo + k + 2] * W[wo + k + 2];
        a3 += X[xo + k + 3] * W[wo + k + 3];
      }
      let acc = a0 + a1 + a2 + a3;
      for (; k < din; k++) acc += X[xo + k] * W[wo + k];
      Y[yo + j] = acc;
    }
  }
}

/** dX[T,din] += dY[T,dout] . W[dout,din] */
export function matmulBackX(
  dY: Float32Array,
  W: Float32Array,
  dX: Float32Array,
  T: number,
  din: number,
  dout: number,
): void {
  for (let i = 0; i < T; i++) {
    const go = i * dout;
    const xo = i * din;
    for (let j = 0; j < dout; j++) {
      const g = dY[go + j];
      if (g === 0) continue;
      const wo = j * din;
      let k = 0;
      for (; k + 3 < din; k += 4) {
        dX[xo + k] += g * W[wo + k];
        dX[xo + k + 1] += g * W[wo + k + 1];
        dX[xo + k + 2] += g * W[wo + k + 2];
        dX[xo + k + 3] += g * W[wo + k + 3];
      }
      for (; k < din; k++) dX[xo + k] += g * W[wo + k];
    }
  }
}

/** dW[dout,din] += dY[T,dout]^T . X[T,din] */
export function matmulBackW(
  dY: Float32Array,
  X: Float32Array,
  dW: Float32Array,
  T: number,
  din: number,
  dout: number,
): void {
  for (let i = 0; i < T; i++) {
    const go = i * dout;
    const xo = i * din;
    for (let j = 0; j < dout; j++) {
      const g = dY[go + j];
      if (g === 0) continue;
      const wo = j * din;
      let k = 0;
      for (; k + 3 < din; k += 4) {
        dW[wo + k] += g * X[xo + k];
        dW[wo + k + 1] += g * X[xo + k + 1];
        dW[wo + k + 2] += g * X[xo + k + 2];
        dW[wo + k + 3] += g * X[xo + k + 3];
      }
      for (; k < din; k++) dW[wo + k] += g * X[xo + k];
    }
  }
}

export interface AdamState {
  m: Float32Array;
  v: Float32Array;
  step: number;
}

export function adamInit(size: number): AdamState {
  return { m: new Float32Array(size), v: new Float32Array(size), step: 0 };
}

/** One Adam update over the flat parameter buffer; grads are zeroed. */
export function adamStep(
  params: Float32Array,
  grads: Float32Array,
  state: AdamState,
  lr: number,
  beta1 = 0.9,
  beta2 = 0.99,
  eps = 1e-8,
  clip = 1.0,
): void {
  let sq = 0;
  for (let i = 0; i < grads.length; i++) sq += grads[i] * grads[i];
  const norm = Math.sqrt(sq);
  const scale = clip > 0 && norm > clip ? clip / norm : 1;

  state.step += 1;
  const c1 = 1 - Math.pow(beta1, state.step);
  const c2 = 1 - Math.pow(beta2, state.step);
  const { m, v } = state;
  for (let i = 0; i < params.length; i++) {
    const g = grads[i] * scale;
    m[i] = beta1 * m[i] + (1 - beta1) * g;
    v[i] = beta2 * v[i] + (1 - beta2) * g * g;
    params[i] -= (lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + eps);
    grads[i] = 0;
  }
}
