"""Latent control signal construction.

The control signal is a (C, H', W') float32 tensor at latent resolution
(image size over the VAE divisor, 8 by default).  Text-described instances
are painted: every latent cell of the instance mask receives the same text
embedding vector.  Image-described instances are warped: the patch-feature
grid is sampled ROI-Align style over the mask's bounding box, after which a
fraction of the warped cells is replaced by the encoder's global vector to
inject whole-object identity.  Background cells stay exactly zero, and masks
are disjoint, so composition over instances is order-free.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import PipelineConfig
from .embeddings import EmbeddingProvider, ImageEmbedding, TextEmbedding
from .errors import DegenerateBox, DimensionMismatch, OverlapWrite
from .instructions import InstanceMask, InstanceSpec, InstructionSet
from .seeding import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LatentControlSignal:
    values: np.ndarray  # float32 (C, H', W')

    @classmethod
    def zeros(cls, channels: int, h_prime: int, w_prime: int) -> "LatentControlSignal":
        return cls(np.zeros((channels, h_prime, w_prime), dtype=np.float32))

    @property
    def c(self) -> int:
        return self.values.shape[0]

    @property
    def h_prime(self) -> int:
        return self.values.shape[1]

    @property
    def w_prime(self) -> int:
        return self.values.shape[2]

    def occupied(self) -> np.ndarray:
        """Bool (H', W') grid of cells carrying any nonzero channel."""
        return (self.values != 0).any(axis=0)


@dataclass(frozen=True)
class LatentMask:
    """One instance's occupancy at latent resolution."""

    bits: np.ndarray  # bool (H', W')
    source_instance: int

    @property
    def cell_count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class BoundingBox:
    """Half-open cell-coordinate box: [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x0 >= self.x1 or self.y0 >= self.y1:
            raise DegenerateBox(f"box ({self.x0},{self.y0})-({self.x1},{self.y1}) has no area")

    @classmethod
    def around(cls, lmask: LatentMask) -> "BoundingBox":
        ys, xs = np.nonzero(lmask.bits)
        if ys.size == 0:
            raise DegenerateBox(f"latent mask of instance {lmask.source_instance} is empty")
        return cls(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0


@dataclass(frozen=True)
class WarpedCells:
    """Sparse per-cell feature vectors produced by spatial warping."""

    cells: np.ndarray  # int64 (K, 2) as (y, x), row-major order
    values: np.ndarray  # float32 (K, C)

    def __len__(self) -> int:
        return self.cells.shape[0]

    def __iter__(self):
        for (y, x), vec in zip(self.cells, self.values):
            yield (int(y), int(x)), vec


def latent_cell_owners(labels: np.ndarray, h_prime: int, w_prime: int) -> np.ndarray:
    """Assign each latent cell to at most one instance by pixel occupancy.

    labels is an integer id image whose dimensions are exact multiples of the
    latent grid.  A cell goes to the instance with the largest pixel share,
    ties to the lowest id; the winner must hold at least half as many pixels
    as the strongest claim on the cell (background included), which bounds how
    far quantization can bloat thin structures.  Returns int32 (H', W') of
    winning ids, 0 where the cell stays background.
    """
    h, w = labels.shape
    if h % h_prime or w % w_prime:
        raise DimensionMismatch(
            f"label image {labels.shape} not a multiple of latent ({h_prime}, {w_prime})"
        )
    max_id = int(labels.max(initial=0))
    if max_id == 0:
        return np.zeros((h_prime, w_prime), dtype=np.int32)
    # dense-coded copy so the counts tensor stays small for sparse large ids
    hist = np.bincount(labels.ravel(), minlength=max_id + 1)
    ids = np.nonzero(hist[1:])[0] + 1  # ascending
    lut = np.zeros(max_id + 1, dtype=np.int32)
    lut[ids] = np.arange(1, ids.size + 1, dtype=np.int32)
    codes = lut[labels]

    counts = kernels.occupancy_counts(codes, h_prime, w_prime)
    fg = counts[1:]
    best = fg.argmax(axis=0)  # first max wins: lowest id
    c_best = np.take_along_axis(fg, best[None], axis=0)[0]
    c_bg = counts[0]
    assigned = (c_best >= 1) & (2 * c_best >= c_bg)
    owners = np.where(assigned, ids.astype(np.int32)[best], 0)
    return owners.astype(np.int32)


def downsample_mask(
    mask: InstanceMask,
    h_prime: int,
    w_prime: int,
    competing: list[InstanceMask] | None = None,
    instance_id: int = 1,
) -> LatentMask:
    """Project one pixel mask onto the latent grid under occupancy voting.

    Competing masks take part in the vote with ids following the target's, so
    ties resolve in the target's favor.  An instance can legitimately come out
    empty at latent scale; callers decide whether that is a warning.
    """
    labels = np.zeros(mask.bits.shape, dtype=np.int32)
    labels[mask.bits] = 1
    for i, other in enumerate(competing or []):
        if other.bits.shape != mask.bits.shape:
            raise DimensionMismatch("competing mask shape differs from target")
        labels[other.bits] = i + 2
    owners = latent_cell_owners(labels, h_prime, w_prime)
    return LatentMask(owners == 1, source_instance=instance_id)


def paint(
    lc: LatentControlSignal, emb: TextEmbedding, lmask: LatentMask
) -> LatentControlSignal:
    """Write one text embedding into every cell of the mask, in place.

    Cells receive the vector exactly (no scaling or blending); target cells
    must currently be zero, keeping instance sums overlap-free.
    """
    if emb.channels != lc.c:
        raise DimensionMismatch(f"embedding C={emb.channels} vs signal C={lc.c}")
    if lmask.bits.shape != (lc.h_prime, lc.w_prime):
        raise DimensionMismatch(
            f"latent mask {lmask.bits.shape} vs signal ({lc.h_prime}, {lc.w_prime})"
        )
    if (lc.values[:, lmask.bits] != 0).any():
        raise OverlapWrite(
            f"instance {lmask.source_instance} would paint already-occupied cells"
        )
    lc.values[:, lmask.bits] = emb.values[:, None]
    return lc


def spatial_warp(emb: ImageEmbedding, lmask: LatentMask, box: BoundingBox) -> WarpedCells:
    """Sample the patch grid over the mask, one feature vector per true cell.

    Each cell's center is normalized within the box and mapped to continuous
    grid coordinates under the half-pixel-center convention; the result is the
    bilinear blend of the four surrounding patch features, border-clamped.
    The ROI resolution therefore follows the mask instead of a fixed pooling
    size.
    """
    ys, xs = np.nonzero(lmask.bits)
    if ys.size:
        if (
            xs.min() < box.x0
            or ys.min() < box.y0
            or xs.max() >= box.x1
            or ys.max() >= box.y1
        ):
            raise ValueError("bounding box does not enclose the latent mask")
    g = emb.grid_size
    u = (xs + 0.5 - box.x0) / box.width
    v = (ys + 0.5 - box.y0) / box.height
    gx = u * g - 0.5
    gy = v * g - 0.5
    values = kernels.bilinear_gather(emb.spatial, gy, gx)
    cells = np.stack([ys, xs], axis=1).astype(np.int64)
    return WarpedCells(cells, values)


def drop_replace(
    warped: WarpedCells,
    global_vec: np.ndarray,
    rate: float,
    rng: np.random.Generator,
) -> WarpedCells:
    """Swap a fixed fraction of warped cells for the global identity vector.

    Exactly round(rate * K) cells are chosen uniformly without replacement;
    the choice is a pure function of the generator state.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    k = len(warped)
    n = round(rate * k)
    values = warped.values.copy()
    if n:
        chosen = rng.permutation(k)[:n]
        values[chosen] = np.asarray(global_vec, dtype=np.float32)
    return WarpedCells(warped.cells, values)


def write_cells(lc: LatentControlSignal, warped: WarpedCells) -> LatentControlSignal:
    """Scatter warped vectors into the signal; target cells must be zero."""
    ys, xs = warped.cells[:, 0], warped.cells[:, 1]
    if (lc.values[:, ys, xs] != 0).any():
        raise OverlapWrite("warped cells would overwrite occupied cells")
    lc.values[:, ys, xs] = warped.values.T
    return lc


def latent_shape(instr: InstructionSet, divisor: int) -> tuple[int, int]:
    if instr.image_height % divisor or instr.image_width % divisor:
        raise DimensionMismatch(
            f"image {instr.image_width}x{instr.image_height} not divisible by {divisor}"
        )
    return instr.image_height // divisor, instr.image_width // divisor


def compose(
    instr: InstructionSet,
    provider: EmbeddingProvider,
    config: PipelineConfig,
    rng: np.random.Generator | int,
) -> LatentControlSignal:
    """Build the full control signal for an instruction set.

    Text instances are painted, image instances warped and drop-replaced, all
    at latent resolution.  Per-instance randomness is derived from one base
    draw plus the instance id, so instance order never changes the result.
    """
    hp, wp = latent_shape(instr, config.latent_divisor)
    owners = latent_cell_owners(instr.label_image(), hp, wp)
    base = rng if isinstance(rng, int) else int(rng.integers(0, 2**62))
    return compose_onto(
        LatentControlSignal.zeros(config.channels, hp, wp),
        instr.instances,
        owners,
        provider,
        config,
        base,
    )


def compose_onto(
    lc: LatentControlSignal,
    specs: Sequence[InstanceSpec],
    owners: np.ndarray,
    provider: EmbeddingProvider,
    config: PipelineConfig,
    base_seed: int,
) -> LatentControlSignal:
    """Apply the given instances onto lc using precomputed cell owners."""
    for spec in specs:
        bits = owners == spec.instance_id
        if not bits.any():
            logger.warning(
                "instance %d vanished at latent resolution %dx%d",
                spec.instance_id,
                lc.h_prime,
                lc.w_prime,
            )
            continue
        lmask = LatentMask(bits, source_instance=spec.instance_id)
        if spec.description.is_text:
            emb = provider.get_text(spec.description.embedding_key)
            paint(lc, emb, lmask)
        else:
            emb = provider.get_image(spec.description.embedding_key)
            if emb.channels != lc.c:
                raise DimensionMismatch(f"embedding C={emb.channels} vs signal C={lc.c}")
            box = BoundingBox.around(lmask)
            warped = spatial_warp(emb, lmask, box)
            warped = drop_replace(
                warped,
                emb.global_vec,
                config.drop_rate,
                make_rng("drop-replace", base_seed, spec.instance_id),
            )
            write_cells(lc, warped)
    return lc
