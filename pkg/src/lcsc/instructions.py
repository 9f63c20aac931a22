"""Instance-level instruction types and panoptic annotation ingestion.

An instruction bundles a global prompt with N instance specs, each pairing a
binary occupancy mask with a text-or-image description key.  Masks must be
pairwise disjoint (the panoptic property); overlap is rejected outright rather
than blended, so downstream composition over instances is order-free.

Annotation corpus schema (one record per sample):
  annotation document (JSON): {"image_width", "image_height", "global_prompt",
      "segments": [{"id", "caption_key", "image_key"?, "bbox"?}, ...]}
  label image: single-channel 16-bit integer grid, 0 = background, nonzero
      values are segment ids
  caption table (JSON): {caption_key: caption text}
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInstance,
    InstructionError,
    MissingKey,
    UnknownLabel,
)

DEFAULT_MAX_INSTANCES = 64

TEXT = "text"
IMAGE = "image"


@dataclass(frozen=True)
class InstanceMask:
    """Binary occupancy grid for one instance, at image resolution."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        object.__setattr__(self, "bits", bits)
        if bits.ndim != 2:
            raise DimensionMismatch(f"mask must be 2D, got shape {bits.shape}")
        if not bits.any():
            raise EmptyInstance("mask has no true cells")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def pixel_count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class InstanceDescription:
    """Tagged union: a text or image description, held as an embedding key."""

    kind: str
    embedding_key: str

    def __post_init__(self):
        if self.kind not in (TEXT, IMAGE):
            raise InstructionError(f"description kind must be text|image, got {self.kind!r}")

    @classmethod
    def text(cls, embedding_key: str) -> "InstanceDescription":
        return cls(TEXT, embedding_key)

    @classmethod
    def image(cls, embedding_key: str) -> "InstanceDescription":
        return cls(IMAGE, embedding_key)

    @property
    def is_text(self) -> bool:
        return self.kind == TEXT


@dataclass(frozen=True)
class InstanceSpec:
    """One instance: where it goes (mask) and what it is (description).

    image_key, when present, names a reference-image embedding that modality
    selection may switch the description to at compile time.
    """

    mask: InstanceMask
    description: InstanceDescription
    instance_id: int
    image_key: str | None = None

    def __post_init__(self):
        if self.instance_id < 1:
            raise InstructionError(f"instance_id must be >= 1, got {self.instance_id}")


@dataclass(frozen=True)
class Violation:
    rule: str
    instance_ids: tuple[int, ...]
    detail: str = ""


@dataclass(frozen=True)
class InstructionSet:
    """Validated bundle of a global prompt plus disjoint instance specs."""

    global_prompt: str
    instances: tuple[InstanceSpec, ...]
    image_width: int
    image_height: int
    max_instances: int = field(default=DEFAULT_MAX_INSTANCES, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        problems = validate(self)
        if problems:
            v = problems[0]
            raise InstructionError(f"{v.rule} (instances {v.instance_ids}): {v.detail}")

    def __len__(self) -> int:
        return len(self.instances)

    def label_image(self) -> np.ndarray:
        """Reassemble the instance masks into one int32 label image.

        Exact because masks are disjoint; 0 is background.
        """
        labels = np.zeros((self.image_height, self.image_width), dtype=np.int32)
        for spec in self.instances:
            labels[spec.mask.bits] = spec.instance_id
        return labels


def validate(instr: InstructionSet) -> list[Violation]:
    """Check every instruction invariant; return findings instead of raising."""
    out: list[Violation] = []
    n = len(instr.instances)
    if n < 1 or n > instr.max_instances:
        out.append(
            Violation("instance_count", (), f"N={n} outside [1, {instr.max_instances}]")
        )
    seen: dict[int, int] = {}
    for spec in instr.instances:
        if spec.instance_id in seen:
            out.append(
                Violation("duplicate_id", (spec.instance_id,), "instance_id reused")
            )
        seen[spec.instance_id] = 1
        if spec.mask.bits.shape != (instr.image_height, instr.image_width):
            out.append(
                Violation(
                    "mask_dimensions",
                    (spec.instance_id,),
                    f"mask {spec.mask.bits.shape} vs image "
                    f"({instr.image_height}, {instr.image_width})",
                )
            )
        if not spec.mask.bits.any():
            out.append(Violation("empty_mask", (spec.instance_id,), "no true cells"))

    # pairwise disjointness via a shared occupancy counter
    shaped = [
        s
        for s in instr.instances
        if s.mask.bits.shape == (instr.image_height, instr.image_width)
    ]
    if len(shaped) > 1:
        occupancy = np.zeros((instr.image_height, instr.image_width), dtype=np.int16)
        for spec in shaped:
            occupancy += spec.mask.bits
        if occupancy.max() > 1:
            collision = occupancy > 1
            ids = tuple(
                s.instance_id for s in shaped if (s.mask.bits & collision).any()
            )
            out.append(Violation("overlap", ids, f"{int(collision.sum())} shared pixels"))
    return out


def ingest_panoptic(
    annotation_doc: Mapping[str, Any],
    id_mask: np.ndarray,
    caption_table: Mapping[str, str],
    max_instances: int = DEFAULT_MAX_INSTANCES,
) -> InstructionSet:
    """Build an InstructionSet from a panoptic annotation record.

    One InstanceSpec per declared segment, in declaration order; masks come
    from the label image so disjointness holds by construction.  Descriptions
    default to the Text variant keyed by the segment's caption key.

    Raises DimensionMismatch when the label image disagrees with the declared
    size, UnknownLabel for mask labels missing from the annotation,
    EmptyInstance for declared segments with zero pixels, and MissingKey for
    caption keys absent from the table.
    """
    width = int(annotation_doc["image_width"])
    height = int(annotation_doc["image_height"])
    id_mask = np.asarray(id_mask)
    if id_mask.shape != (height, width):
        raise DimensionMismatch(
            f"label image {id_mask.shape} vs declared ({height}, {width})"
        )
    segments = annotation_doc.get("segments", [])
    declared = {int(seg["id"]) for seg in segments}
    present = {int(v) for v in np.unique(id_mask) if v != 0}
    unknown = present - declared
    if unknown:
        raise UnknownLabel(f"labels {sorted(unknown)} present in mask but not declared")

    specs = []
    for seg in segments:
        seg_id = int(seg["id"])
        bits = id_mask == seg_id
        if not bits.any():
            raise EmptyInstance(f"segment {seg_id} declared but has zero pixels")
        caption_key = str(seg["caption_key"])
        if caption_key not in caption_table:
            raise MissingKey(f"caption key {caption_key!r} not in caption table")
        image_key = seg.get("image_key")
        specs.append(
            InstanceSpec(
                mask=InstanceMask(bits),
                description=InstanceDescription.text(caption_key),
                instance_id=seg_id,
                image_key=None if image_key is None else str(image_key),
            )
        )
    return InstructionSet(
        global_prompt=str(annotation_doc.get("global_prompt", "")),
        instances=tuple(specs),
        image_width=width,
        image_height=height,
        max_instances=max_instances,
    )
