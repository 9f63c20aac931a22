"""Binary container for compiled samples.

File layout, byte-exact:

    offset 0   8 bytes   magic, ASCII "LCSC" + 4-digit format version "0001"
    offset 8   8 bytes   unsigned little-endian length M of the manifest
    offset 16  M bytes   manifest, UTF-8 JSON (sorted keys, no whitespace)
    then, for each record in manifest order:
               N bytes   payload, raw little-endian float32, C order
               4 bytes   CRC32 of the payload, unsigned little-endian

The manifest is ``{"format_version": 1, "metadata": {...}, "records": [...]}``
where each record is ``{"dtype": "f32", "name": ..., "offset": ...,
"shape": [...]}`` and ``offset`` is the absolute file offset of the payload.
Records appear in ascending offset order. Metadata values are strings.

Floats round-trip bit-exactly (including subnormals, -0.0, inf and NaN
payloads) because payloads are raw IEEE-754 bytes, never text.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import Bucket
from .edges import EdgeWeightMap
from .errors import (
    BadMagic,
    ChecksumMismatch,
    ParseError,
    SerializationOverflow,
    VersionUnsupported,
)
from .lcs import LatentControlSignal
from .pipeline import CompiledSample

__all__ = [
    "FORMAT_VERSION",
    "MAGIC",
    "StoredFile",
    "write_records",
    "read_records",
    "write_sample",
    "read_sample",
]

MAGIC = b"LCSC"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sQ")
_CRC = struct.Struct("<I")
_MAX_BYTES = 2**63 - 1
_REF_PREFIX = "ref_crop_"


@dataclass(frozen=True)
class StoredFile:
    """Everything a container holds: named f32 arrays plus string metadata."""

    records: dict[str, np.ndarray]
    metadata: dict[str, str]


def _magic_bytes() -> bytes:
    return MAGIC + f"{FORMAT_VERSION:04d}".encode("ascii")


def write_records(
    path: str | Path, records: dict[str, np.ndarray], metadata: dict[str, str]
) -> None:
    """Serialize named float32 arrays to ``path``.

    Records are written in the dict's iteration order. Arrays are converted
    to contiguous little-endian float32; metadata keys and values must be
    strings.
    """
    arrays: list[tuple[str, np.ndarray]] = []
    for name, arr in records.items():
        if not isinstance(name, str) or not name:
            raise ParseError(f"record name must be a non-empty string, got {name!r}")
        a = np.ascontiguousarray(arr, dtype="<f4")
        arrays.append((name, a))
    for k, v in metadata.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise ParseError(f"metadata must map str to str, got {k!r}: {v!r}")

    # Manifest length depends on offsets, which depend on manifest length;
    # offsets are monotone in the length, so iterate until it fixes.
    def build(manifest_len: int) -> tuple[bytes, int]:
        pos = _HEADER.size + manifest_len
        entries = []
        for name, a in arrays:
            entries.append(
                {
                    "dtype": "f32",
                    "name": name,
                    "offset": pos,
                    "shape": list(a.shape),
                }
            )
            pos += a.nbytes + _CRC.size
        doc = {
            "format_version": FORMAT_VERSION,
            "metadata": metadata,
            "records": entries,
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return blob, pos

    manifest, total = build(0)
    while True:
        again, total = build(len(manifest))
        if len(again) == len(manifest):
            manifest = again
            break
        manifest = again
    if total > _MAX_BYTES:
        raise SerializationOverflow(f"container would span {total} bytes")

    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_magic_bytes(), len(manifest)))
        fh.write(manifest)
        for _, a in arrays:
            payload = a.tobytes()
            fh.write(payload)
            fh.write(_CRC.pack(zlib.crc32(payload) & 0xFFFFFFFF))


def read_records(path: str | Path) -> StoredFile:
    """Parse a container, verifying magic, version, bounds and checksums."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ParseError(
            f"file is {len(data)} bytes, header needs bytes 0..{_HEADER.size}"
        )
    raw_magic, manifest_len = _HEADER.unpack_from(data, 0)
    if raw_magic[:4] != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {raw_magic[:4]!r}")
    try:
        version = int(raw_magic[4:].decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise VersionUnsupported(f"unreadable version field {raw_magic[4:]!r}")
    if version != FORMAT_VERSION:
        raise VersionUnsupported(
            f"format version {version} (supported: {FORMAT_VERSION})"
        )
    end = _HEADER.size + manifest_len
    if end > len(data):
        raise ParseError(
            f"manifest spans bytes {_HEADER.size}..{end}, file ends at {len(data)}"
        )
    try:
        doc = json.loads(data[_HEADER.size : end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"manifest is not valid JSON: {exc}")
    if not isinstance(doc, dict) or "records" not in doc:
        raise ParseError("manifest must be an object with a 'records' list")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
    ):
        raise ParseError("manifest metadata must map strings to strings")

    records: dict[str, np.ndarray] = {}
    prev_end = end
    for entry in doc["records"]:
        try:
            name = entry["name"]
            dtype = entry["dtype"]
            shape = tuple(int(s) for s in entry["shape"])
            offset = int(entry["offset"])
        except (TypeError, KeyError, ValueError) as exc:
            raise ParseError(f"malformed record entry {entry!r}: {exc}")
        if dtype != "f32":
            raise ParseError(f"record {name!r} has unsupported dtype {dtype!r}")
        if name in records:
            raise ParseError(f"duplicate record name {name!r}")
        if offset < prev_end:
            raise ParseError(
                f"record {name!r} at offset {offset} overlaps bytes before {prev_end}"
            )
        count = 1
        for s in shape:
            if s < 0:
                raise ParseError(f"record {name!r} has negative dimension {s}")
            count *= s
        stop = offset + count * 4 + _CRC.size
        if stop > len(data):
            raise ParseError(
                f"record {name!r} needs bytes {offset}..{stop}, "
                f"file ends at {len(data)}"
            )
        payload = data[offset : offset + count * 4]
        (stored_crc,) = _CRC.unpack_from(data, offset + count * 4)
        actual = zlib.crc32(payload) & 0xFFFFFFFF
        if stored_crc != actual:
            raise ChecksumMismatch(
                f"record {name!r}: stored crc {stored_crc:#010x}, "
                f"computed {actual:#010x}"
            )
        records[name] = np.frombuffer(payload, dtype="<f4").reshape(shape).copy()
        prev_end = stop
    return StoredFile(records=records, metadata=metadata)


def _sample_records(sample: CompiledSample) -> dict[str, np.ndarray]:
    records: dict[str, np.ndarray] = {
        "lc": sample.lc.values,
        "weight_map": sample.weight_map.weights,
    }
    for iid in sorted(sample.ref_crops):
        records[f"{_REF_PREFIX}{iid}"] = sample.ref_crops[iid]
    return records


def _sample_metadata(sample: CompiledSample) -> dict[str, str]:
    return {
        "bucket_height": str(sample.bucket.target_height),
        "bucket_id": sample.bucket.ratio_id,
        "bucket_width": str(sample.bucket.target_width),
        "global_prompt": sample.global_prompt,
        "modalities": ",".join(f"{i}:{k}" for i, k in sample.modality_choices),
        "seed": str(sample.seed),
        "source_id": sample.source_id,
    }


def write_sample(
    sample: CompiledSample,
    path: str | Path,
    extra_records: dict[str, np.ndarray] | None = None,
) -> None:
    """Write one compiled sample; extra_records ride along under their names."""
    records = _sample_records(sample)
    for name, arr in (extra_records or {}).items():
        if name in records:
            raise ParseError(f"extra record {name!r} collides with a sample record")
        records[name] = arr
    write_records(path, records, _sample_metadata(sample))


def read_sample(path: str | Path) -> CompiledSample:
    """Rebuild a CompiledSample. Unrecognized records are ignored; use
    read_records to get at everything in the file."""
    stored = read_records(path)
    try:
        lc = stored.records["lc"]
        weights = stored.records["weight_map"]
        meta = stored.metadata
        bucket = Bucket(
            ratio_id=meta["bucket_id"],
            target_height=int(meta["bucket_height"]),
            target_width=int(meta["bucket_width"]),
        )
        modalities = tuple(
            (int(part.split(":")[0]), part.split(":")[1])
            for part in meta["modalities"].split(",")
            if part
        )
        sample = CompiledSample(
            lc=LatentControlSignal(lc),
            weight_map=EdgeWeightMap(weights),
            bucket=bucket,
            global_prompt=meta["global_prompt"],
            modality_choices=modalities,
            seed=int(meta["seed"]),
            source_id=meta["source_id"],
            ref_crops={
                int(name[len(_REF_PREFIX) :]): arr
                for name, arr in stored.records.items()
                if name.startswith(_REF_PREFIX)
            },
        )
    except (KeyError, ValueError, IndexError) as exc:
        raise ParseError(f"container lacks a well-formed sample: {exc!r}")
    return sample
