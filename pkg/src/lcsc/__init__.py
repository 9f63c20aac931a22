"""Compile instance-level layout instructions into latent control signals.

The pipeline takes a panoptic annotation (who is where) plus per-instance
embeddings (what each instance is), paints or warps those embeddings into a
spatial tensor at latent resolution, attaches an edge-weighted loss map, and
serializes everything to a checksummed binary container.
"""

from .config import Bucket, PipelineConfig, dump_config, load_config
from .edges import EdgeMap, EdgeWeightMap, Schedule, progressive_weight, sobel_edges, weight_map
from .embeddings import FileStore, ImageEmbedding, StubProvider, TextEmbedding
from .errors import (
    BadMagic,
    ChecksumMismatch,
    ConfigError,
    DegenerateBox,
    DimensionMismatch,
    EmptyInstance,
    InstructionError,
    LcscError,
    MissingKey,
    OverlapWrite,
    ParseError,
    SerializationOverflow,
    StoreError,
    UnknownLabel,
    VersionUnsupported,
)
from .instructions import (
    InstanceDescription,
    InstanceMask,
    InstanceSpec,
    InstructionSet,
    Violation,
    ingest_panoptic,
    validate,
)
from .lcs import (
    BoundingBox,
    LatentControlSignal,
    LatentMask,
    WarpedCells,
    compose,
    downsample_mask,
    drop_replace,
    latent_cell_owners,
    paint,
    spatial_warp,
)
from .pipeline import CompiledSample, assign_bucket, compile_sample, extract_reference, select_modalities
from .store import read_records, read_sample, write_records, write_sample

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Bucket",
    "PipelineConfig",
    "dump_config",
    "load_config",
    "EdgeMap",
    "EdgeWeightMap",
    "Schedule",
    "progressive_weight",
    "sobel_edges",
    "weight_map",
    "FileStore",
    "ImageEmbedding",
    "StubProvider",
    "TextEmbedding",
    "LcscError",
    "StoreError",
    "BadMagic",
    "ChecksumMismatch",
    "ConfigError",
    "DegenerateBox",
    "DimensionMismatch",
    "EmptyInstance",
    "InstructionError",
    "MissingKey",
    "OverlapWrite",
    "ParseError",
    "SerializationOverflow",
    "UnknownLabel",
    "VersionUnsupported",
    "InstanceDescription",
    "InstanceMask",
    "InstanceSpec",
    "InstructionSet",
    "Violation",
    "ingest_panoptic",
    "validate",
    "BoundingBox",
    "LatentControlSignal",
    "LatentMask",
    "WarpedCells",
    "compose",
    "downsample_mask",
    "drop_replace",
    "latent_cell_owners",
    "paint",
    "spatial_warp",
    "CompiledSample",
    "assign_bucket",
    "compile_sample",
    "extract_reference",
    "select_modalities",
    "read_records",
    "read_sample",
    "write_records",
    "write_sample",
]
