/**
 * Toy latent denoiser with a zero-initialized conditioning branch.
 *
 * Main path (encoder-decoder over [C, H, W] latents):
 *   conv3x3 -> relu -> conv3x3/stride2 -> relu   (encode, H/2)
 *   conv3x3 -> relu                               (bottleneck)
 *   upsample2x -> conv3x3 -> relu -> conv3x3      (decode, back to H)
 *   [+ conditioning features]                     (added to the output)
 *
 * Conditioning branch: a 1x1 conv projects the control signal's channels,
 * then a full-resolution 3x3 conv whose weights AND bias start at exactly
 * zero, so at initialization the branch contributes nothing and the model
 * output is bit-identical with the control signal zeroed. The branch joins
 * the decoder at its output stage, at full latent resolution, because the
 * control signal carries per-cell detail a bottleneck would destroy.
 */

import { Rng } from "./rng.js";
import { T, Tape, add, conv2d, relu, upsample2x } from "./tensor.js";

export interface ModelConfig {
  inChannels: number; // noisy-latent channels (equals output channels)
  condChannels: number; // control-signal channels
  hidden: number; // width of the first feature level
}

interface ConvParams {
  w: T;
  b: T;
}

function heConv(rng: Rng, co: number, ci: number, k: number): ConvParams {
  const w = T.zeros([co, ci, k, k]);
  const std = Math.sqrt(2 / (ci * k * k));
  for (let i = 0; i < w.size; i++) w.data[i] = rng.gauss() * std;
  return { w, b: T.zeros([co]) };
}

function zeroConv(co: number, ci: number, k: number): ConvParams {
  return { w: T.zeros([co, ci, k, k]), b: T.zeros([co]) };
}

export class ToyDenoiser {
  readonly cfg: ModelConfig;
  readonly encIn: ConvParams;
  readonly encDown: ConvParams;
  readonly mid: ConvParams;
  readonly decUp: ConvParams;
  readonly decOut: ConvParams;
  readonly alignProj: ConvParams;
  readonly alignOut: ConvParams; // zero-initialized: branch is silent at step 0

  constructor(cfg: ModelConfig, rng: Rng) {
    this.cfg = cfg;
    const f = cfg.hidden;
    this.encIn = heConv(rng, f, cfg.inChannels, 3);
    this.encDown = heConv(rng, 2 * f, f, 3);
    this.mid = heConv(rng, 2 * f, 2 * f, 3);
    this.decUp = heConv(rng, f, 2 * f, 3);
    this.decOut = heConv(rng, cfg.inChannels, f, 3);
    this.alignProj = heConv(rng, f, cfg.condChannels, 1);
    this.alignOut = zeroConv(cfg.inChannels, f, 3);
  }

  params(): Array<{ name: string; t: T }> {
    const out: Array<{ name: string; t: T }> = [];
    const push = (name: string, p: ConvParams) => {
      out.push({ name: `${name}.w`, t: p.w }, { name: `${name}.b`, t: p.b });
    };
    push("encIn", this.encIn);
    push("encDown", this.encDown);
    push("mid", this.mid);
    push("decUp", this.decUp);
    push("decOut", this.decOut);
    push("alignProj", this.alignProj);
    push("alignOut", this.alignOut);
    return out;
  }

  paramCount(): number {
    return this.params().reduce((a, p) => a + p.t.size, 0);
  }

  zeroGrad(): void {
    for (const p of this.params()) p.t.zeroGrad();
  }

  /** x: [inChannels, H, W] noisy latent; cond: [condChannels, H, W] control signal. */
  forward(tape: Tape, x: T, cond: T): T {
    const h1 = relu(tape, conv2d(tape, x, this.encIn.w, this.encIn.b, 1, 1));
    const h2 = relu(tape, conv2d(tape, h1, this.encDown.w, this.encDown.b, 2, 1));
    const h3 = relu(tape, conv2d(tape, h2, this.mid.w, this.mid.b, 1, 1));
    const up = upsample2x(tape, h3);
    const dec = conv2d(tape, up, this.decUp.w, this.decUp.b, 1, 1);
    const h4 = relu(tape, dec);
    const main = conv2d(tape, h4, this.decOut.w, this.decOut.b, 1, 1);
    const a1 = conv2d(tape, cond, this.alignProj.w, this.alignProj.b, 1, 0);
    const a2 = conv2d(tape, a1, this.alignOut.w, this.alignOut.b, 1, 1);
    return add(tape, main, a2);
  }
}
