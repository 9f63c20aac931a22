/**
 * Central finite-difference verification of the hand-rolled backward passes.
 *
 * For a scalar loss L(theta), the analytic dL/dtheta_i is compared against
 * (L(theta_i + eps) - L(theta_i - eps)) / (2 eps) for every checked entry;
 * the reported figure is the worst relative error.
 */

import { Rng } from "./rng.js";
import { ToyDenoiser } from "./model.js";
import { T, Tape, weightedMse } from "./tensor.js";

export interface GradcheckResult {
  maxRelErr: number;
  checked: number;
}

function relErr(analytic: number, numeric: number): number {
  const scale = Math.max(Math.abs(analytic), Math.abs(numeric), 1e-6);
  return Math.abs(analytic - numeric) / scale;
}

/** Check dL/d(entries of tensors) for an arbitrary scalar-valued closure. */
export function checkGradients(
  tensors: T[],
  analytic: Float64Array[],
  evalLoss: () => number,
  eps = 1e-5,
): GradcheckResult {
  let maxRelErr = 0;
  let checked = 0;
  tensors.forEach((t, k) => {
    for (let i = 0; i < t.size; i++) {
      const saved = t.data[i];
      t.data[i] = saved + eps;
      const up = evalLoss();
      t.data[i] = saved - eps;
      const down = evalLoss();
      t.data[i] = saved;
      const numeric = (up - down) / (2 * eps);
      maxRelErr = Math.max(maxRelErr, relErr(analytic[k][i], numeric));
      checked += 1;
    }
  });
  return { maxRelErr, checked };
}

function fillGauss(t: T, rng: Rng, scale = 1): void {
  for (let i = 0; i < t.size; i++) t.data[i] = rng.gauss() * scale;
}

/** FD check of the reweighted loss alone on random small grids. */
export function gradcheckLoss(seed: number, c = 2, h = 3, w = 3): GradcheckResult {
  const rng = new Rng(seed);
  const pred = T.zeros([c, h, w]);
  const target = T.zeros([c, h, w]);
  const weights = T.zeros([h, w]);
  fillGauss(pred, rng);
  fillGauss(target, rng);
  for (let i = 0; i < weights.size; i++) weights.data[i] = 0.5 + rng.next() * 2;

  const tape = new Tape();
  pred.zeroGrad();
  const loss = weightedMse(tape, pred, target, weights);
  tape.backward(loss);
  const analytic = Float64Array.from(pred.grad);

  const evalLoss = () => {
    const t = new Tape();
    return weightedMse(t, pred, target, weights).data[0];
  };
  return checkGradients([pred], [analytic], evalLoss);
}

/** FD check through the full model: every parameter entry plus both inputs. */
export function gradcheckModel(seed: number): GradcheckResult {
  const rng = new Rng(seed);
  const model = new ToyDenoiser({ inChannels: 2, condChannels: 3, hidden: 4 }, rng);
  // move the zero-initialized branch off zero so its path is exercised too
  for (let i = 0; i < model.alignOut.w.size; i++) model.alignOut.w.data[i] = rng.gauss() * 0.3;
  for (let i = 0; i < model.alignOut.b.size; i++) model.alignOut.b.data[i] = rng.gauss() * 0.1;

  const x = T.zeros([2, 6, 6]);
  const cond = T.zeros([3, 6, 6]);
  const target = T.zeros([2, 6, 6]);
  const weights = T.zeros([6, 6]);
  fillGauss(x, rng);
  fillGauss(cond, rng);
  fillGauss(target, rng);
  for (let i = 0; i < weights.size; i++) weights.data[i] = 0.5 + rng.next() * 2;

  const run = (): number => {
    const tape = new Tape();
    return weightedMse(tape, model.forward(tape, x, cond), target, weights).data[0];
  };

  const tensors = [...model.params().map((p) => p.t), x, cond];
  for (const t of tensors) t.zeroGrad();
  const tape = new Tape();
  const loss = weightedMse(tape, model.forward(tape, x, cond), target, weights);
  tape.backward(loss);
  const analytic = tensors.map((t) => Float64Array.from(t.grad));

  return checkGradients(tensors, analytic, run);
}
