"""Per-sample compilation: bucketing, modality selection, reference crops,
signal composition, and weight-map attachment.

Every random decision is derived from (sample seed, stage name, instance id),
never from call order, so a compiled sample is a pure function of its inputs,
seed, and training step regardless of batching or parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import Bucket, PipelineConfig
from .edges import EdgeMap, EdgeWeightMap, downsample_gray, sobel_edges, weight_map
from .embeddings import EmbeddingProvider
from .errors import DimensionMismatch
from .instructions import IMAGE, TEXT, InstanceMask, InstanceSpec, InstructionSet
from .lcs import LatentControlSignal, compose_onto, latent_cell_owners
from .seeding import derive_seed, make_rng

__all__ = [
    "Bucket",
    "CompiledSample",
    "assign_bucket",
    "select_modalities",
    "extract_reference",
    "compile_sample",
]


@dataclass(frozen=True)
class CompiledSample:
    """The serialized unit a trainer consumes: signal, weights, metadata."""

    lc: LatentControlSignal
    weight_map: EdgeWeightMap
    bucket: Bucket
    global_prompt: str
    modality_choices: tuple[tuple[int, str], ...]  # (instance_id, "text"|"image")
    seed: int
    source_id: str
    ref_crops: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.weight_map.weights.shape != (self.lc.h_prime, self.lc.w_prime):
            raise DimensionMismatch(
                f"weight map {self.weight_map.weights.shape} vs latent "
                f"({self.lc.h_prime}, {self.lc.w_prime})"
            )


def assign_bucket(width: int, height: int, buckets: tuple[Bucket, ...]) -> Bucket:
    """Pick the bucket with the nearest aspect ratio in log space.

    Ties go to the earliest bucket in list order; scaling width and height by
    a common factor never changes the assignment.
    """
    if not buckets:
        raise ValueError("bucket list is empty")
    target = math.log(width / height)
    best = buckets[0]
    best_d = abs(target - best.log_ratio)
    for b in buckets[1:]:
        d = abs(target - b.log_ratio)
        if d < best_d:
            best, best_d = b, d
    return best


def select_modalities(
    instr: InstructionSet, p_image: float, rng: np.random.Generator
) -> tuple[tuple[int, str], ...]:
    """Draw text-vs-image per instance, image with probability p_image.

    One uniform draw per instance, in instance order; instances without an
    image embedding key always come out Text.
    """
    if not 0.0 <= p_image <= 1.0:
        raise ValueError(f"p_image must be in [0, 1], got {p_image}")
    draws = rng.random(len(instr.instances))
    choices = []
    for spec, d in zip(instr.instances, draws):
        use_image = spec.image_key is not None and d < p_image
        choices.append((spec.instance_id, IMAGE if use_image else TEXT))
    return tuple(choices)


def apply_modalities(
    instr: InstructionSet, choices: tuple[tuple[int, str], ...]
) -> list[InstanceSpec]:
    """Return specs whose descriptions reflect the drawn modalities."""
    from .instructions import InstanceDescription

    by_id = dict(choices)
    out = []
    for spec in instr.instances:
        kind = by_id[spec.instance_id]
        if kind == IMAGE:
            desc = InstanceDescription.image(spec.image_key)
        else:
            desc = InstanceDescription.text(spec.description.embedding_key)
        out.append(
            InstanceSpec(spec.mask, desc, spec.instance_id, image_key=spec.image_key)
        )
    return out


def extract_reference(
    image: np.ndarray,
    mask: InstanceMask,
    rng: np.random.Generator,
    size: int = 364,
    brightness_range: tuple[float, float] = (0.8, 1.2),
    flip: bool | None = None,
    brightness: float | None = None,
) -> np.ndarray:
    """Cut the instance out of the ground-truth image and augment it.

    Masked pixels are cropped to the mask's bounding box with the background
    zeroed, resized to (size, size), flipped horizontally with probability
    0.5, and brightness-scaled by a uniform factor, clamped to [0, 1].  Pass
    flip/brightness to pin an augmentation instead of drawing it.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise DimensionMismatch(f"reference image must be (H, W, 3), got {image.shape}")
    if image.shape[:2] != mask.bits.shape:
        raise DimensionMismatch(
            f"image {image.shape[:2]} vs mask {mask.bits.shape}"
        )
    ys, xs = np.nonzero(mask.bits)
    y0, y1 = int(ys.min()), int(ys.max()) + 1
    x0, x1 = int(xs.min()), int(xs.max()) + 1
    crop = image[y0:y1, x0:x1] * mask.bits[y0:y1, x0:x1, None]
    crop = kernels.bilinear_resize(np.ascontiguousarray(crop), size, size)
    if flip is None:
        flip = bool(rng.random() < 0.5)
    if flip:
        crop = crop[:, ::-1]
    if brightness is None:
        lo, hi = brightness_range
        brightness = float(rng.uniform(lo, hi))
    crop = np.clip(crop * brightness, 0.0, 1.0)
    return np.ascontiguousarray(crop, dtype=np.float32)


def compile_sample(
    instr: InstructionSet,
    image_gray: np.ndarray | None,
    provider: EmbeddingProvider,
    config: PipelineConfig,
    step: int,
    seed: int,
    source_id: str = "",
    id_mask: np.ndarray | None = None,
    image_rgb: np.ndarray | None = None,
) -> CompiledSample:
    """Compile one instruction set into a trainer-ready sample.

    id_mask, when supplied, must be the label image the instruction set was
    ingested from; it skips reassembling labels from per-instance masks on
    the hot path.  image_rgb enables reference-crop extraction for instances
    drawn as Image so an offline encoder can embed the augmented crops.
    """
    bucket = assign_bucket(instr.image_width, instr.image_height, config.buckets)
    th, tw = bucket.target_height, bucket.target_width
    hp, wp = th // config.latent_divisor, tw // config.latent_divisor

    labels = instr.label_image() if id_mask is None else np.asarray(id_mask)
    if labels.shape != (instr.image_height, instr.image_width):
        raise DimensionMismatch(
            f"label image {labels.shape} vs instruction "
            f"({instr.image_height}, {instr.image_width})"
        )
    if labels.shape != (th, tw):
        labels = kernels.nearest_resize(
            np.ascontiguousarray(labels, dtype=np.int32), th, tw
        )
    owners = latent_cell_owners(np.ascontiguousarray(labels, dtype=np.int32), hp, wp)

    choices = select_modalities(instr, config.p_image, make_rng(seed, "modality"))
    specs = apply_modalities(instr, choices)

    lc = LatentControlSignal.zeros(config.channels, hp, wp)
    compose_onto(lc, specs, owners, provider, config, derive_seed(seed, "compose"))

    if image_gray is not None:
        gray = np.asarray(image_gray, dtype=np.float64)
        if gray.shape != (instr.image_height, instr.image_width):
            raise DimensionMismatch(
                f"grayscale {gray.shape} vs instruction "
                f"({instr.image_height}, {instr.image_width})"
            )
        edges = sobel_edges(downsample_gray(gray, hp, wp), config.edge_threshold)
    else:
        edges = EdgeMap(np.zeros((hp, wp), dtype=bool))
    weights = weight_map(edges, step, config.schedule)

    ref_crops: dict[int, np.ndarray] = {}
    if image_rgb is not None:
        for spec, (iid, kind) in zip(specs, choices):
            if kind == IMAGE:
                ref_crops[iid] = extract_reference(
                    image_rgb,
                    spec.mask,
                    make_rng(seed, "ref", iid),
                    size=config.reference_size,
                    brightness_range=config.brightness_range,
                )

    return CompiledSample(
        lc=lc,
        weight_map=weights,
        bucket=bucket,
        global_prompt=instr.global_prompt,
        modality_choices=choices,
        seed=seed,
        source_id=source_id,
        ref_crops=ref_crops,
    )
