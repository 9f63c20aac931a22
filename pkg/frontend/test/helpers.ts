/**
 * Test-side writer for .lcsc containers. Mirrors the documented layout so the
 * reader can be exercised against both well-formed and deliberately broken
 * files without any external tooling.
 */

import { crc32 } from "../src/container.js";

export interface SpecRecord {
  name: string;
  shape: number[];
  values: ArrayLike<number>;
  /** Overrides the manifest dtype field (payload stays f32). */
  dtype?: string;
  /** Added to the computed sequential offset (negative creates overlap). */
  offsetShift?: number;
}

function elementCount(shape: number[]): number {
  return Math.max(
    0,
    shape.reduce((a, b) => a * b, 1),
  );
}

/**
 * Build a container from record specs. Offsets are assigned sequentially
 * after the manifest via fixpoint iteration (the manifest's byte length
 * depends on the offset digits it contains).
 */
export function buildContainer(
  records: SpecRecord[],
  metadata: Record<string, unknown> = {},
  formatVersion: unknown = 1,
): Uint8Array {
  let offsets = records.map(() => 0);
  let manifestBytes = new Uint8Array(0);
  for (let iter = 0; iter < 8; iter++) {
    const doc = {
      format_version: formatVersion,
      metadata,
      records: records.map((r, i) => ({
        dtype: r.dtype ?? "f32",
        name: r.name,
        offset: offsets[i],
        shape: r.shape,
      })),
    };
    manifestBytes = new TextEncoder().encode(JSON.stringify(doc));
    const next: number[] = [];
    let cursor = 16 + manifestBytes.length;
    for (const r of records) {
      next.push(cursor + (r.offsetShift ?? 0));
      cursor += elementCount(r.shape) * 4 + 4;
    }
    if (next.every((o, i) => o === offsets[i])) break;
    offsets = next;
  }

  let total = 16 + manifestBytes.length;
  records.forEach((r, i) => {
    total = Math.max(total, offsets[i] + elementCount(r.shape) * 4 + 4);
  });
  const bytes = new Uint8Array(total);
  const view = new DataView(bytes.buffer);
  bytes.set(new TextEncoder().encode("LCSC0001"), 0);
  view.setBigUint64(8, BigInt(manifestBytes.length), true);
  bytes.set(manifestBytes, 16);
  let writtenEnd = 16 + manifestBytes.length;
  records.forEach((r, i) => {
    const off = offsets[i];
    const n = elementCount(r.shape);
    // Leave deliberately malformed regions unwritten so earlier records stay
    // intact and the reader fails on the manifest claim, not on their bytes.
    if (off < writtenEnd || off + n * 4 + 4 > total) return;
    for (let k = 0; k < n; k++) view.setFloat32(off + k * 4, Number(r.values[k]), true);
    view.setUint32(off + n * 4, crc32(bytes.subarray(off, off + n * 4)), true);
    writtenEnd = off + n * 4 + 4;
  });
  return bytes;
}

/** Build a file whose manifest region holds the given text verbatim. */
export function buildWithManifestText(text: string): Uint8Array {
  const m = new TextEncoder().encode(text);
  const bytes = new Uint8Array(16 + m.length);
  const view = new DataView(bytes.buffer);
  bytes.set(new TextEncoder().encode("LCSC0001"), 0);
  view.setBigUint64(8, BigInt(m.length), true);
  bytes.set(m, 16);
  return bytes;
}

/** Copy with bytes [at, at+replacement.length) overwritten. */
export function withBytes(src: Uint8Array, at: number, replacement: ArrayLike<number>): Uint8Array {
  const out = src.slice();
  out.set(replacement, at);
  return out;
}

/** Copy with the ASCII text written at the given offset. */
export function withAscii(src: Uint8Array, at: number, text: string): Uint8Array {
  return withBytes(src, at, new TextEncoder().encode(text));
}
