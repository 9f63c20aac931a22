/**
 * Reader for .lcsc containers.
 *
 * File layout, byte-exact and little-endian throughout:
 *
 *   offset 0    8 bytes   magic: ASCII "LCSC" + 4-digit format version "0001"
 *   offset 8    8 bytes   u64: length M of the manifest
 *   offset 16   M bytes   manifest: UTF-8 JSON, sorted keys, no whitespace
 *   then per record, in manifest order:
 *               N bytes   payload: raw IEEE-754 float32, C order
 *               4 bytes   u32: CRC32 of the payload bytes
 *
 * The manifest is {"format_version": 1, "metadata": {...}, "records": [...]};
 * each record carries name, dtype ("f32"), shape, and the absolute byte
 * offset of its payload. Offsets ascend and payloads never overlap.
 */

export class ContainerError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ContainerError";
  }
}

const MAGIC = "LCSC";
const SUPPORTED_VERSION = 1;

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

export function crc32(bytes: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < bytes.length; i++) {
    c = CRC_TABLE[(c ^ bytes[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

export interface TensorRecord {
  name: string;
  shape: number[];
  /** Payload converted to float64 for exact onward arithmetic. */
  values: Float64Array;
}

export interface ContainerFile {
  records: Map<string, TensorRecord>;
  metadata: Record<string, string>;
}

interface ManifestRecord {
  dtype: string;
  name: string;
  offset: number;
  shape: number[];
}

function parseManifest(buf: Uint8Array): {
  records: ManifestRecord[];
  metadata: Record<string, string>;
} {
  let doc: unknown;
  try {
    doc = JSON.parse(new TextDecoder("utf-8", { fatal: true }).decode(buf));
  } catch (e) {
    throw new ContainerError(`manifest is not valid JSON: ${(e as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new ContainerError("manifest must be a JSON object");
  }
  const m = doc as Record<string, unknown>;
  if (m.format_version !== SUPPORTED_VERSION) {
    throw new ContainerError(
      `unsupported format version ${String(m.format_version)}, reader supports ${SUPPORTED_VERSION}`,
    );
  }
  if (typeof m.metadata !== "object" || m.metadata === null || Array.isArray(m.metadata)) {
    throw new ContainerError("manifest metadata must be an object");
  }
  const metadata: Record<string, string> = {};
  for (const [k, v] of Object.entries(m.metadata as Record<string, unknown>)) {
    if (typeof v !== "string") {
      throw new ContainerError(`metadata value for ${JSON.stringify(k)} must be a string`);
    }
    metadata[k] = v;
  }
  if (!Array.isArray(m.records)) {
    throw new ContainerError("manifest records must be an array");
  }
  const records: ManifestRecord[] = [];
  for (const r of m.records as unknown[]) {
    if (typeof r !== "object" || r === null) throw new ContainerError("record entries must be objects");
    const rec = r as Record<string, unknown>;
    if (typeof rec.name !== "string" || rec.name.length === 0) {
      throw new ContainerError("record name must be a nonempty string");
    }
    if (rec.dtype !== "f32") {
      throw new ContainerError(`record ${JSON.stringify(rec.name)}: unsupported dtype ${String(rec.dtype)}`);
    }
    if (!Number.isSafeInteger(rec.offset as number) || (rec.offset as number) < 0) {
      throw new ContainerError(`record ${JSON.stringify(rec.name)}: bad offset`);
    }
    if (!Array.isArray(rec.shape) || rec.shape.some((d) => !Number.isSafeInteger(d) || d < 0)) {
      throw new ContainerError(`record ${JSON.stringify(rec.name)}: bad shape`);
    }
    records.push({
      dtype: rec.dtype,
      name: rec.name,
      offset: rec.offset as number,
      shape: (rec.shape as number[]).map(Number),
    });
  }
  return { records, metadata };
}

/** Parse a .lcsc container from raw bytes, verifying structure and checksums. */
export function parseContainer(bytes: Uint8Array): ContainerFile {
  if (bytes.length < 16) {
    throw new ContainerError(`file too short for header: ${bytes.length} bytes`);
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const magic = new TextDecoder("ascii").decode(bytes.subarray(0, 4));
  if (magic !== MAGIC) {
    throw new ContainerError(`bad magic ${JSON.stringify(magic)}, expected ${JSON.stringify(MAGIC)}`);
  }
  const versionText = new TextDecoder("ascii").decode(bytes.subarray(4, 8));
  if (!/^[0-9]{4}$/.test(versionText)) {
    throw new ContainerError(`bad version field ${JSON.stringify(versionText)}`);
  }
  const headerVersion = Number(versionText);
  if (headerVersion !== SUPPORTED_VERSION) {
    throw new ContainerError(
      `unsupported format version ${headerVersion}, reader supports ${SUPPORTED_VERSION}`,
    );
  }
  const manifestLen = view.getBigUint64(8, true);
  if (manifestLen > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new ContainerError("manifest length does not fit a safe integer");
  }
  const mLen = Number(manifestLen);
  if (16 + mLen > bytes.length) {
    throw new ContainerError(`manifest needs bytes 16..${16 + mLen}, file ends at ${bytes.length}`);
  }
  const { records: manifest, metadata } = parseManifest(bytes.subarray(16, 16 + mLen));

  const out = new Map<string, TensorRecord>();
  let prevEnd = 16 + mLen;
  for (const rec of manifest) {
    if (out.has(rec.name)) {
      throw new ContainerError(`duplicate record name ${JSON.stringify(rec.name)}`);
    }
    const count = rec.shape.reduce((a, b) => a * b, 1);
    const payloadBytes = count * 4;
    if (rec.offset < prevEnd) {
      throw new ContainerError(
        `record ${JSON.stringify(rec.name)}: offset ${rec.offset} overlaps previous data ending at ${prevEnd}`,
      );
    }
    const end = rec.offset + payloadBytes + 4;
    if (end > bytes.length) {
      throw new ContainerError(
        `record ${JSON.stringify(rec.name)}: needs bytes ${rec.offset}..${end}, file ends at ${bytes.length}`,
      );
    }
    const payload = bytes.subarray(rec.offset, rec.offset + payloadBytes);
    const stored = view.getUint32(rec.offset + payloadBytes, true);
    const computed = crc32(payload);
    if (stored !== computed) {
      throw new ContainerError(
        `record ${JSON.stringify(rec.name)}: stored crc 0x${stored
          .toString(16)
          .padStart(8, "0")} != computed 0x${computed.toString(16).padStart(8, "0")}`,
      );
    }
    const values = new Float64Array(count);
    for (let i = 0; i < count; i++) {
      values[i] = view.getFloat32(rec.offset + i * 4, true);
    }
    out.set(rec.name, { name: rec.name, shape: rec.shape, values });
    prevEnd = end;
  }
  return { records: out, metadata };
}
