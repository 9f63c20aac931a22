/**
 * Toy training demo and contract checks.
 *
 * Trains the conditioned denoiser on compiled control-signal containers and
 * an identically-seeded ablation whose control signal is zeroed, then writes
 * a JSON report with:
 *   - zero-init neutrality (conditioning branch silent at initialization)
 *   - finite-difference gradient checks (loss alone and the full model)
 *   - the conditioned-vs-ablated held-out comparison
 *
 * Usage: node dist/train.js --corpus <dir> [--steps 500] [--report out.json]
 */

import { writeFileSync } from "node:fs";
import { resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { Adam } from "./adam.js";
import { Corpus, Sample, loadCorpus } from "./data.js";
import { gradcheckLoss, gradcheckModel } from "./gradcheck.js";
import { ModelConfig, ToyDenoiser } from "./model.js";
import { Rng } from "./rng.js";
import { T, Tape, meanScalars, weightedMse } from "./tensor.js";

export interface TrainOptions {
  steps: number;
  batchSize: number;
  lr: number;
  seed: number;
  noiseSigma: number;
  hidden: number;
  heldoutCount: number;
  /** Noise draws per held-out sample for the evaluation average. */
  evalDraws: number;
  traceEvery: number;
}

export const DEFAULT_OPTIONS: TrainOptions = {
  steps: 500,
  batchSize: 3,
  lr: 3e-3,
  seed: 2024,
  noiseSigma: 0.3,
  hidden: 12,
  heldoutCount: 3,
  evalDraws: 4,
  traceEvery: 25,
};

interface EvalCase {
  sample: Sample;
  noisy: T[];
}

function gaussLike(shape: number[], rng: Rng, sigma: number): T {
  const t = T.zeros(shape);
  for (let i = 0; i < t.size; i++) t.data[i] = rng.gauss() * sigma;
  return t;
}

function addInto(base: T, noise: T): T {
  const out = T.zeros(base.shape);
  for (let i = 0; i < base.size; i++) out.data[i] = base.data[i] + noise.data[i];
  return out;
}

/** Fixed held-out evaluation set: same noise draws for every model and step. */
function buildEvalCases(heldout: Sample[], opts: TrainOptions): EvalCase[] {
  return heldout.map((sample, si) => {
    const rng = new Rng(opts.seed ^ (0x5eed0000 + si));
    const noisy: T[] = [];
    for (let k = 0; k < opts.evalDraws; k++) {
      noisy.push(addInto(sample.target, gaussLike(sample.target.shape, rng, opts.noiseSigma)));
    }
    return { sample, noisy };
  });
}

function evalHeldout(model: ToyDenoiser, cases: EvalCase[], zeroCond: boolean): number {
  let acc = 0;
  let n = 0;
  for (const c of cases) {
    const cond = zeroCond ? T.zeros(c.sample.lc.shape) : c.sample.lc;
    for (const noisy of c.noisy) {
      const tape = new Tape();
      const pred = model.forward(tape, noisy, cond);
      acc += weightedMse(tape, pred, c.sample.target, c.sample.weights).data[0];
      n += 1;
    }
  }
  return acc / n;
}

export interface TrainResult {
  finalHeldout: number;
  heldoutTrace: Array<{ step: number; loss: number }>;
  trainTrace: Array<{ step: number; loss: number }>;
}

/**
 * Train one model. zeroCond ablates conditioning by feeding a zero control
 * signal everywhere; init, batch order, and noise draws are identical for
 * both arms because they derive from the same seeds.
 */
export function trainModel(
  corpus: Corpus,
  zeroCond: boolean,
  opts: TrainOptions = DEFAULT_OPTIONS,
): TrainResult {
  const train = corpus.samples.slice(0, corpus.samples.length - opts.heldoutCount);
  const heldout = corpus.samples.slice(corpus.samples.length - opts.heldoutCount);
  if (train.length === 0 || heldout.length === 0) {
    throw new Error(`corpus too small: ${corpus.samples.length} samples`);
  }
  const cfg: ModelConfig = {
    inChannels: corpus.meta.target_channels,
    condChannels: corpus.meta.channels,
    hidden: opts.hidden,
  };
  const model = new ToyDenoiser(cfg, new Rng(opts.seed));
  const optimizer = new Adam(model.params().map((p) => p.t), opts.lr);
  const noiseRng = new Rng(opts.seed ^ 0x0a11ce);
  const evalCases = buildEvalCases(heldout, opts);
  const zeroConds = new Map(train.map((s) => [s.id, T.zeros(s.lc.shape)]));

  const trainTrace: Array<{ step: number; loss: number }> = [];
  const heldoutTrace: Array<{ step: number; loss: number }> = [];
  for (let step = 0; step < opts.steps; step++) {
    const tape = new Tape();
    const losses: T[] = [];
    for (let b = 0; b < opts.batchSize; b++) {
      const sample = train[(step * opts.batchSize + b) % train.length];
      const noisy = addInto(sample.target, gaussLike(sample.target.shape, noiseRng, opts.noiseSigma));
      const cond = zeroCond ? zeroConds.get(sample.id)! : sample.lc;
      const pred = model.forward(tape, noisy, cond);
      losses.push(weightedMse(tape, pred, sample.target, sample.weights));
    }
    const loss = meanScalars(tape, losses);
    model.zeroGrad();
    for (const s of train) s.lc.zeroGrad(); // inputs accumulate grads too
    tape.backward(loss);
    optimizer.step();
    if (step % opts.traceEvery === 0 || step === opts.steps - 1) {
      trainTrace.push({ step, loss: loss.data[0] });
      heldoutTrace.push({ step, loss: evalHeldout(model, evalCases, zeroCond) });
    }
  }
  return {
    finalHeldout: heldoutTrace[heldoutTrace.length - 1].loss,
    heldoutTrace,
    trainTrace,
  };
}

export interface ChecksReport {
  param_count: number;
  param_budget: number;
  checks: Record<string, Record<string, number | boolean | string>>;
  loss_trace: { conditioned: TrainResult["heldoutTrace"]; ablated: TrainResult["heldoutTrace"] };
  all_passed: boolean;
}

/** Max |output difference| between a real and a zeroed control signal at init. */
export function zeroInitNeutrality(corpus: Corpus, opts: TrainOptions = DEFAULT_OPTIONS): number {
  const sample = corpus.samples[0];
  const cfg: ModelConfig = {
    inChannels: corpus.meta.target_channels,
    condChannels: corpus.meta.channels,
    hidden: opts.hidden,
  };
  const model = new ToyDenoiser(cfg, new Rng(opts.seed));
  const noisy = addInto(sample.target, gaussLike(sample.target.shape, new Rng(7), opts.noiseSigma));
  const withCond = model.forward(new Tape(), noisy, sample.lc);
  const withZero = model.forward(new Tape(), noisy, T.zeros(sample.lc.shape));
  let maxDiff = 0;
  for (let i = 0; i < withCond.size; i++) {
    maxDiff = Math.max(maxDiff, Math.abs(withCond.data[i] - withZero.data[i]));
  }
  return maxDiff;
}

export function runAllChecks(corpusDir: string, opts: TrainOptions = DEFAULT_OPTIONS): ChecksReport {
  const corpus = loadCorpus(corpusDir);
  const cfg: ModelConfig = {
    inChannels: corpus.meta.target_channels,
    condChannels: corpus.meta.channels,
    hidden: opts.hidden,
  };
  const paramCount = new ToyDenoiser(cfg, new Rng(0)).paramCount();
  const paramBudget = 100_000;

  const neutrality = zeroInitNeutrality(corpus, opts);
  const lossCheck = gradcheckLoss(1);
  const modelCheck = gradcheckModel(2);
  const conditioned = trainModel(corpus, false, opts);
  const ablated = trainModel(corpus, true, opts);

  const checks: ChecksReport["checks"] = {
    zero_init_neutrality: {
      max_abs_diff: neutrality,
      tolerance: 1e-12,
      pass: neutrality <= 1e-12,
    },
    loss_gradcheck: {
      max_rel_err: lossCheck.maxRelErr,
      entries_checked: lossCheck.checked,
      tolerance: 1e-4,
      pass: lossCheck.maxRelErr < 1e-4,
    },
    model_gradcheck: {
      max_rel_err: modelCheck.maxRelErr,
      entries_checked: modelCheck.checked,
      tolerance: 1e-4,
      pass: modelCheck.maxRelErr < 1e-4,
    },
    parameter_budget: {
      param_count: paramCount,
      budget: paramBudget,
      pass: paramCount <= paramBudget,
    },
    conditioning_ablation: {
      steps: opts.steps,
      heldout_conditioned: conditioned.finalHeldout,
      heldout_ablated: ablated.finalHeldout,
      pass: conditioned.finalHeldout < ablated.finalHeldout,
    },
  };
  const allPassed = Object.values(checks).every((c) => c.pass === true);
  return {
    param_count: paramCount,
    param_budget: paramBudget,
    checks,
    loss_trace: { conditioned: conditioned.heldoutTrace, ablated: ablated.heldoutTrace },
    all_passed: allPassed,
  };
}

function parseArgs(argv: string[]): { corpus: string; steps: number; report: string | null } {
  let corpus = "fixtures";
  let steps = DEFAULT_OPTIONS.steps;
  let report: string | null = null;
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--corpus":
        corpus = argv[++i];
        break;
      case "--steps":
        steps = Number(argv[++i]);
        break;
      case "--report":
        report = argv[++i];
        break;
      default:
        throw new Error(`unknown argument ${argv[i]}`);
    }
  }
  return { corpus, steps, report };
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const opts = { ...DEFAULT_OPTIONS, steps: args.steps };
  const report = runAllChecks(args.corpus, opts);
  if (args.report) {
    writeFileSync(args.report, JSON.stringify(report, null, 2) + "\n");
  }
  for (const [name, c] of Object.entries(report.checks)) {
    const detail = Object.entries(c)
      .filter(([k]) => k !== "pass")
      .map(([k, v]) => `${k}=${typeof v === "number" ? Number(v.toPrecision(6)) : v}`)
      .join(" ");
    console.log(`${c.pass ? "PASS" : "FAIL"} ${name}: ${detail}`);
  }
  if (!report.all_passed) {
    const failed = Object.entries(report.checks)
      .filter(([, c]) => c.pass !== true)
      .map(([n]) => n);
    console.error(`failed checks: ${failed.join(", ")}`);
    return 1;
  }
  console.log(`all checks passed (${report.param_count} parameters)`);
  return 0;
}

const entryPath = process.argv[1] ? resolve(process.argv[1]) : "";
if (entryPath && resolve(fileURLToPath(import.meta.url)) === entryPath) {
  process.exit(main(process.argv.slice(2)));
}
