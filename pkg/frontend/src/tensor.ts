/**
 * Minimal float64 tensors with reverse-mode autodiff.
 *
 * A Tape records one backward closure per op in execution order; backward()
 * replays them in reverse. Tensors are channels-first ([C, H, W] for feature
 * maps) with dense Float64Array storage and a same-sized gradient buffer.
 */

export class T {
  readonly shape: number[];
  readonly data: Float64Array;
  readonly grad: Float64Array;

  constructor(shape: number[], data?: Float64Array) {
    this.shape = shape.slice();
    const n = shape.reduce((a, b) => a * b, 1);
    if (data !== undefined && data.length !== n) {
      throw new Error(`data length ${data.length} != shape product ${n}`);
    }
    this.data = data ?? new Float64Array(n);
    this.grad = new Float64Array(n);
  }

  get size(): number {
    return this.data.length;
  }

  static zeros(shape: number[]): T {
    return new T(shape);
  }

  static from(shape: number[], values: ArrayLike<number>): T {
    return new T(shape, Float64Array.from(values));
  }

  zeroGrad(): void {
    this.grad.fill(0);
  }
}

export class Tape {
  private steps: Array<() => void> = [];

  record(backward: () => void): void {
    this.steps.push(backward);
  }

  /** Seed the scalar loss gradient with 1 and propagate to all inputs. */
  backward(loss: T): void {
    if (loss.size !== 1) throw new Error("backward() expects a scalar loss");
    loss.grad[0] = 1;
    for (let i = this.steps.length - 1; i >= 0; i--) this.steps[i]();
  }
}

function shapesEqual(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((d, i) => d === b[i]);
}

/**
 * 2D convolution on [Ci, H, W] with kernel [Co, Ci, K, K], bias [Co],
 * symmetric zero padding, square stride. Output [Co, Ho, Wo].
 */
export function conv2d(tape: Tape, x: T, w: T, b: T, stride = 1, pad = 1): T {
  const [ci, h, wd] = x.shape;
  const [co, ciW, kh, kw] = w.shape;
  if (ci !== ciW) throw new Error(`conv2d: input channels ${ci} != kernel ${ciW}`);
  if (b.shape.length !== 1 || b.shape[0] !== co) throw new Error("conv2d: bias shape mismatch");
  const ho = Math.floor((h + 2 * pad - kh) / stride) + 1;
  const wo = Math.floor((wd + 2 * pad - kw) / stride) + 1;
  const y = T.zeros([co, ho, wo]);

  const xd = x.data, wdat = w.data, yd = y.data;
  for (let oc = 0; oc < co; oc++) {
    const bias = b.data[oc];
    for (let oy = 0; oy < ho; oy++) {
      for (let ox = 0; ox < wo; ox++) {
        let acc = bias;
        const iy0 = oy * stride - pad;
        const ix0 = ox * stride - pad;
        for (let ic = 0; ic < ci; ic++) {
          const xBase = ic * h * wd;
          const wBase = (oc * ci + ic) * kh * kw;
          for (let ky = 0; ky < kh; ky++) {
            const iy = iy0 + ky;
            if (iy < 0 || iy >= h) continue;
            for (let kx = 0; kx < kw; kx++) {
              const ix = ix0 + kx;
              if (ix < 0 || ix >= wd) continue;
              acc += xd[xBase + iy * wd + ix] * wdat[wBase + ky * kw + kx];
            }
          }
        }
        yd[(oc * ho + oy) * wo + ox] = acc;
      }
    }
  }

  tape.record(() => {
    const gy = y.grad, gx = x.grad, gw = w.grad, gb = b.grad;
    for (let oc = 0; oc < co; oc++) {
      for (let oy = 0; oy < ho; oy++) {
        for (let ox = 0; ox < wo; ox++) {
          const g = gy[(oc * ho + oy) * wo + ox];
          if (g === 0) continue;
          gb[oc] += g;
          const iy0 = oy * stride - pad;
          const ix0 = ox * stride - pad;
          for (let ic = 0; ic < ci; ic++) {
            const xBase = ic * h * wd;
            const wBase = (oc * ci + ic) * kh * kw;
            for (let ky = 0; ky < kh; ky++) {
              const iy = iy0 + ky;
              if (iy < 0 || iy >= h) continue;
              for (let kx = 0; kx < kw; kx++) {
                const ix = ix0 + kx;
                if (ix < 0 || ix >= wd) continue;
                gx[xBase + iy * wd + ix] += wdat[wBase + ky * kw + kx] * g;
                gw[wBase + ky * kw + kx] += xd[xBase + iy * wd + ix] * g;
              }
            }
          }
        }
      }
    }
  });
  return y;
}

export function relu(tape: Tape, x: T): T {
  const y = T.zeros(x.shape);
  for (let i = 0; i < x.size; i++) y.data[i] = x.data[i] > 0 ? x.data[i] : 0;
  tape.record(() => {
    for (let i = 0; i < x.size; i++) if (x.data[i] > 0) x.grad[i] += y.grad[i];
  });
  return y;
}

export function add(tape: Tape, a: T, b: T): T {
  if (!shapesEqual(a.shape, b.shape)) throw new Error("add: shape mismatch");
  const y = T.zeros(a.shape);
  for (let i = 0; i < a.size; i++) y.data[i] = a.data[i] + b.data[i];
  tape.record(() => {
    for (let i = 0; i < a.size; i++) {
      a.grad[i] += y.grad[i];
      b.grad[i] += y.grad[i];
    }
  });
  return y;
}

/** Nearest-neighbor 2x upsample of [C, H, W]. */
export function upsample2x(tape: Tape, x: T): T {
  const [c, h, w] = x.shape;
  const y = T.zeros([c, 2 * h, 2 * w]);
  for (let ic = 0; ic < c; ic++) {
    for (let iy = 0; iy < 2 * h; iy++) {
      const sy = iy >> 1;
      for (let ix = 0; ix < 2 * w; ix++) {
        y.data[(ic * 2 * h + iy) * 2 * w + ix] = x.data[(ic * h + sy) * w + (ix >> 1)];
      }
    }
  }
  tape.record(() => {
    for (let ic = 0; ic < c; ic++) {
      for (let iy = 0; iy < 2 * h; iy++) {
        const sy = iy >> 1;
        for (let ix = 0; ix < 2 * w; ix++) {
          x.grad[(ic * h + sy) * w + (ix >> 1)] += y.grad[(ic * 2 * h + iy) * 2 * w + ix];
        }
      }
    }
  });
  return y;
}

/**
 * Reweighted squared error: mean over all elements of w[h,w] * (pred - target)^2,
 * with the [H, W] weight map broadcast across channels. target and weights are
 * constants (no gradient flows into them).
 */
export function weightedMse(tape: Tape, pred: T, target: T, weights: T): T {
  if (!shapesEqual(pred.shape, target.shape)) throw new Error("weightedMse: pred/target shape mismatch");
  const [c, h, w] = pred.shape;
  if (weights.shape.length !== 2 || weights.shape[0] !== h || weights.shape[1] !== w) {
    throw new Error(`weightedMse: weight map must be [${h}, ${w}]`);
  }
  const n = pred.size;
  let acc = 0;
  for (let ic = 0; ic < c; ic++) {
    for (let iy = 0; iy < h; iy++) {
      for (let ix = 0; ix < w; ix++) {
        const i = (ic * h + iy) * w + ix;
        const r = pred.data[i] - target.data[i];
        acc += weights.data[iy * w + ix] * r * r;
      }
    }
  }
  const loss = T.from([1], [acc / n]);
  tape.record(() => {
    const g = loss.grad[0];
    for (let ic = 0; ic < c; ic++) {
      for (let iy = 0; iy < h; iy++) {
        for (let ix = 0; ix < w; ix++) {
          const i = (ic * h + iy) * w + ix;
          pred.grad[i] += g * (2 / n) * weights.data[iy * w + ix] * (pred.data[i] - target.data[i]);
        }
      }
    }
  });
  return loss;
}

/** Mean of scalar losses (used to average a batch). */
export function meanScalars(tape: Tape, losses: T[]): T {
  const k = losses.length;
  if (k === 0) throw new Error("meanScalars: empty");
  let acc = 0;
  for (const l of losses) {
    if (l.size !== 1) throw new Error("meanScalars: non-scalar input");
    acc += l.data[0];
  }
  const out = T.from([1], [acc / k]);
  tape.record(() => {
    for (const l of losses) l.grad[0] += out.grad[0] / k;
  });
  return out;
}
