"""Access to precomputed per-instance embeddings.

Embedding models run offline; this module only retrieves their outputs.  Two
providers share one interface: a file-backed store (a manifest plus a flat
little-endian float32 blob, read via memory map) and a seeded stub that
fabricates reproducible vectors for tests and toy corpora.

Store layout:
  <dir>/manifest.json   {"format_version": 1, "dtype": "f32", "entries": {...}}
  <dir>/blob.bin        concatenated little-endian float32 payloads

Text entry:   {"kind": "text", "offset", "shape": [C]}
Image entry:  {"kind": "image", "spatial_offset", "spatial_shape": [G, G, C],
               "global_offset", "global_shape": [C]}
Offsets are byte positions into blob.bin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import DimensionMismatch, MissingKey, ParseError
from .seeding import make_rng


@dataclass(frozen=True)
class TextEmbedding:
    values: np.ndarray  # float32 (C,)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float32)
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise DimensionMismatch(f"text embedding must be 1D, got {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("text embedding contains non-finite values")

    @property
    def channels(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ImageEmbedding:
    """Patch-feature grid plus a global identity vector from a vision encoder."""

    spatial: np.ndarray  # float32 (G, G, C)
    global_vec: np.ndarray  # float32 (C,)

    def __post_init__(self):
        s = np.ascontiguousarray(self.spatial, dtype=np.float32)
        g = np.ascontiguousarray(self.global_vec, dtype=np.float32)
        object.__setattr__(self, "spatial", s)
        object.__setattr__(self, "global_vec", g)
        if s.ndim != 3 or s.shape[0] != s.shape[1]:
            raise DimensionMismatch(f"spatial grid must be square (G, G, C), got {s.shape}")
        if g.ndim != 1 or g.shape[0] != s.shape[2]:
            raise DimensionMismatch(
                f"global vector {g.shape} does not match spatial channels {s.shape}"
            )
        if not (np.isfinite(s).all() and np.isfinite(g).all()):
            raise ValueError("image embedding contains non-finite values")

    @property
    def grid_size(self) -> int:
        return self.spatial.shape[0]

    @property
    def channels(self) -> int:
        return self.spatial.shape[2]


class EmbeddingProvider(Protocol):
    def get_text(self, key: str) -> TextEmbedding: ...

    def get_image(self, key: str) -> ImageEmbedding: ...


class StubProvider:
    """Deterministic fabricated embeddings: a pure function of (key, G, C, seed).

    Entries are uniform in [-1, 1], derived per key, so fixtures never need a
    model download and repeated lookups agree exactly.
    """

    def __init__(self, channels: int, grid_size: int, seed: int = 0):
        self.channels = channels
        self.grid_size = grid_size
        self.seed = seed

    def get_text(self, key: str) -> TextEmbedding:
        rng = make_rng("stub-text", self.seed, self.channels, key)
        values = rng.uniform(-1.0, 1.0, self.channels).astype(np.float32)
        return TextEmbedding(values)

    def get_image(self, key: str) -> ImageEmbedding:
        g, c = self.grid_size, self.channels
        rng = make_rng("stub-image", self.seed, g, c, key)
        spatial = rng.uniform(-1.0, 1.0, (g, g, c)).astype(np.float32)
        global_vec = rng.uniform(-1.0, 1.0, c).astype(np.float32)
        return ImageEmbedding(spatial, global_vec)


class FileStore:
    """Memory-mapped reader over a manifest + blob directory."""

    def __init__(self, root: str | Path, channels: int, grid_size: int):
        self.root = Path(root)
        self.channels = channels
        self.grid_size = grid_size
        manifest_path = self.root / "manifest.json"
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ParseError(f"cannot read embedding manifest: {e}") from e
        except json.JSONDecodeError as e:
            raise ParseError(f"embedding manifest is not valid JSON: {e}") from e
        if manifest.get("dtype") != "f32":
            raise ParseError(f"unsupported embedding dtype {manifest.get('dtype')!r}")
        self.entries: dict = manifest["entries"]
        self._blob = np.memmap(self.root / "blob.bin", dtype="<f4", mode="r")

    def _slice(self, offset: int, shape: list[int]) -> np.ndarray:
        count = int(np.prod(shape))
        start = offset // 4
        if offset % 4 or start + count > self._blob.shape[0]:
            raise ParseError(
                f"entry at offset {offset} (+{count * 4} bytes) exceeds blob "
                f"of {self._blob.shape[0] * 4} bytes"
            )
        return np.array(self._blob[start : start + count]).reshape(shape)

    def get_text(self, key: str) -> TextEmbedding:
        entry = self.entries.get(key)
        if entry is None or entry.get("kind") != "text":
            raise MissingKey(f"no text embedding under key {key!r}")
        values = self._slice(int(entry["offset"]), entry["shape"])
        if values.shape != (self.channels,):
            raise DimensionMismatch(
                f"stored text embedding {values.shape} vs configured ({self.channels},)"
            )
        return TextEmbedding(values)

    def get_image(self, key: str) -> ImageEmbedding:
        entry = self.entries.get(key)
        if entry is None or entry.get("kind") != "image":
            raise MissingKey(f"no image embedding under key {key!r}")
        spatial = self._slice(int(entry["spatial_offset"]), entry["spatial_shape"])
        global_vec = self._slice(int(entry["global_offset"]), entry["global_shape"])
        g, c = self.grid_size, self.channels
        if spatial.shape != (g, g, c) or global_vec.shape != (c,):
            raise DimensionMismatch(
                f"stored image embedding {spatial.shape}/{global_vec.shape} vs "
                f"configured ({g}, {g}, {c})/({c},)"
            )
        return ImageEmbedding(spatial, global_vec)


class StoreWriter:
    """Builds a FileStore directory; used by fixture generation and tooling."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._entries: dict = {}
        self._chunks: list[bytes] = []
        self._offset = 0

    def _append(self, arr: np.ndarray) -> int:
        data = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        offset = self._offset
        self._chunks.append(data)
        self._offset += len(data)
        return offset

    def add_text(self, key: str, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.float32)
        self._entries[key] = {
            "kind": "text",
            "offset": self._append(values),
            "shape": list(values.shape),
        }

    def add_image(self, key: str, spatial: np.ndarray, global_vec: np.ndarray) -> None:
        spatial = np.asarray(spatial, dtype=np.float32)
        global_vec = np.asarray(global_vec, dtype=np.float32)
        self._entries[key] = {
            "kind": "image",
            "spatial_offset": self._append(spatial),
            "spatial_shape": list(spatial.shape),
            "global_offset": self._append(global_vec),
            "global_shape": list(global_vec.shape),
        }

    def finalize(self) -> None:
        manifest = {"format_version": 1, "dtype": "f32", "entries": self._entries}
        (self.root / "blob.bin").write_bytes(b"".join(self._chunks))
        (self.root / "manifest.json").write_text(
            json.dumps(manifest, sort_keys=True, indent=1), encoding="utf-8"
        )
