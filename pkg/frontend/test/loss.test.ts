import { describe, expect, it } from "vitest";
import { gradcheckLoss } from "../src/gradcheck.js";
import { Rng } from "../src/rng.js";
import { T, Tape, weightedMse } from "../src/tensor.js";

function fill(t: T, rng: Rng, scale = 1): void {
  for (let i = 0; i < t.size; i++) t.data[i] = rng.gauss() * scale;
}

function lossOf(pred: T, target: T, weights: T): number {
  return weightedMse(new Tape(), pred, target, weights).data[0];
}

describe("reweighted squared error", () => {
  it("reduces to plain MSE when every weight is one", () => {
    const rng = new Rng(11);
    const pred = T.zeros([3, 4, 5]);
    const target = T.zeros([3, 4, 5]);
    fill(pred, rng);
    fill(target, rng);
    const ones = T.from([4, 5], new Array(20).fill(1));

    let mse = 0;
    for (let i = 0; i < pred.size; i++) mse += (pred.data[i] - target.data[i]) ** 2;
    mse /= pred.size;

    expect(lossOf(pred, target, ones)).toBeCloseTo(mse, 14);
  });

  it("is exactly zero for a perfect prediction under any weights", () => {
    const rng = new Rng(12);
    const pred = T.zeros([2, 3, 3]);
    fill(pred, rng);
    const target = T.from(pred.shape, pred.data);
    const weights = T.zeros([3, 3]);
    for (let i = 0; i < weights.size; i++) weights.data[i] = rng.next() * 10;
    expect(lossOf(pred, target, weights)).toBe(0);
  });

  it("matches the worked 2x2 example", () => {
    // Residual 1 everywhere; weights [[1,1],[2,2]] -> (1+1+2+2)/4 = 1.5.
    const pred = T.from([1, 2, 2], [1, 1, 1, 1]);
    const target = T.zeros([1, 2, 2]);
    const weights = T.from([2, 2], [1, 1, 2, 2]);
    expect(lossOf(pred, target, weights)).toBe(1.5);
  });

  it("broadcasts the weight map across channels", () => {
    // Same residuals duplicated on a second channel: the mean is unchanged.
    const pred = T.from([2, 2, 2], [1, 1, 1, 1, 1, 1, 1, 1]);
    const target = T.zeros([2, 2, 2]);
    const weights = T.from([2, 2], [1, 1, 2, 2]);
    expect(lossOf(pred, target, weights)).toBe(1.5);
  });

  it("never decreases when a cell's weight increases", () => {
    const rng = new Rng(13);
    for (let trial = 0; trial < 25; trial++) {
      const pred = T.zeros([2, 4, 4]);
      const target = T.zeros([2, 4, 4]);
      fill(pred, rng);
      fill(target, rng);
      const weights = T.zeros([4, 4]);
      for (let i = 0; i < weights.size; i++) weights.data[i] = rng.next() * 3;

      const base = lossOf(pred, target, weights);
      const cell = rng.int(16);
      const bumped = T.from([4, 4], weights.data);
      bumped.data[cell] += 0.5 + rng.next();
      expect(lossOf(pred, target, bumped)).toBeGreaterThanOrEqual(base - 1e-15);
    }
  });

  it("scales linearly in the weight map", () => {
    const rng = new Rng(14);
    const pred = T.zeros([1, 3, 3]);
    const target = T.zeros([1, 3, 3]);
    fill(pred, rng);
    fill(target, rng);
    const weights = T.zeros([3, 3]);
    for (let i = 0; i < weights.size; i++) weights.data[i] = rng.next() * 2;
    const doubled = T.from([3, 3], weights.data.map((v) => 2 * v));
    expect(lossOf(pred, target, doubled)).toBeCloseTo(2 * lossOf(pred, target, weights), 12);
  });

  it("rejects mismatched shapes", () => {
    const pred = T.zeros([1, 2, 2]);
    expect(() => weightedMse(new Tape(), pred, T.zeros([1, 2, 3]), T.zeros([2, 2]))).toThrow(
      /shape mismatch/,
    );
    expect(() => weightedMse(new Tape(), pred, T.zeros([1, 2, 2]), T.zeros([3, 2]))).toThrow(
      /weight map must be/,
    );
  });

  it("backpropagates gradients that match central finite differences", () => {
    for (const seed of [1, 7, 42]) {
      const result = gradcheckLoss(seed);
      expect(result.checked).toBeGreaterThan(0);
      expect(result.maxRelErr).toBeLessThan(1e-4);
    }
  });
});
