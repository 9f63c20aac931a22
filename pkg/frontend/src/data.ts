/**
 * Load a compiled training corpus: a directory of .lcsc containers plus a
 * corpus.json describing counts and the linear readout used to synthesize
 * the regression target (target_latent = readout_scale * leading channels
 * of the control signal).
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { parseContainer } from "./container.js";
import { T } from "./tensor.js";

export interface CorpusMeta {
  samples: number;
  channels: number;
  target_channels: number;
  readout_scale: number;
  seed: number;
}

export interface Sample {
  id: string;
  /** Control signal [C, H, W]. */
  lc: T;
  /** Regression target [Ct, H, W]. */
  target: T;
  /** Loss weight map [H, W]. */
  weights: T;
}

export interface Corpus {
  meta: CorpusMeta;
  samples: Sample[];
}

export function loadCorpus(dir: string): Corpus {
  const meta = JSON.parse(readFileSync(join(dir, "corpus.json"), "utf-8")) as CorpusMeta;
  const samples: Sample[] = [];
  for (let i = 0; i < meta.samples; i++) {
    const id = `toy-${String(i).padStart(4, "0")}`;
    const file = parseContainer(new Uint8Array(readFileSync(join(dir, `${id}.lcsc`))));
    const lc = file.records.get("lc");
    const target = file.records.get("target_latent");
    const weights = file.records.get("weight_map");
    if (!lc || !target || !weights) {
      throw new Error(`${id}: corpus containers need lc, target_latent, and weight_map records`);
    }
    samples.push({
      id,
      lc: new T(lc.shape, lc.values),
      target: new T(target.shape, target.values),
      weights: new T(weights.shape, weights.values),
    });
  }
  return { meta, samples };
}
