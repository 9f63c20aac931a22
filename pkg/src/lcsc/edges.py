"""Edge-based loss supervision: Sobel edge maps and the progressive weight ramp.

Edges are detected at latent resolution (the grayscale image is bilinearly
downsampled first), thresholded on normalized gradient magnitude into a binary
map, and turned into a per-cell loss weight map: edge cells carry a weight
that climbs along an inverted-cosine ramp from 1 at step 0 to the schedule
maximum at the final step; all other cells stay at exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class Schedule:
    """Progressive enhancement schedule: edge weight rises 1 -> max_weight."""

    max_weight: float = 2.0
    total_steps: int = 10000

    def __post_init__(self):
        if self.max_weight < 1.0:
            raise ConfigError(f"max_weight must be >= 1, got {self.max_weight}")
        if self.total_steps < 1:
            raise ConfigError(f"total_steps must be >= 1, got {self.total_steps}")


@dataclass(frozen=True)
class EdgeMap:
    bits: np.ndarray  # bool (H', W')

    def __post_init__(self):
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=bool))


@dataclass(frozen=True)
class EdgeWeightMap:
    weights: np.ndarray  # float32 (H', W'), each value in [1, max_weight]


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Standard luminance conversion; accepts (H, W, 3) in [0, 1]."""
    r, g, b = LUMA_WEIGHTS
    return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]


def downsample_gray(gray: np.ndarray, h_out: int, w_out: int) -> np.ndarray:
    """Bilinear resize of a grayscale grid to latent resolution."""
    src = np.ascontiguousarray(gray, dtype=np.float64)[..., None]
    return kernels.bilinear_resize(src, h_out, w_out)[..., 0]


def sobel_edges(gray: np.ndarray, threshold: float) -> EdgeMap:
    """Mark cells whose normalized Sobel gradient magnitude reaches threshold.

    The magnitude field is scaled by its maximum before comparing, so an
    all-constant input (zero gradient everywhere) yields an empty map.
    """
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"threshold must be in (0, 1), got {threshold}")
    gray = np.ascontiguousarray(gray, dtype=np.float64)
    mag = kernels.sobel_magnitude(gray)
    peak = mag.max()
    if peak <= 0.0:
        return EdgeMap(np.zeros(gray.shape, dtype=bool))
    return EdgeMap(mag / peak >= threshold)


def progressive_weight(step: int, sched: Schedule) -> float:
    """Inverted cosine ramp: 1 at step 0, max_weight at the final step."""
    if not 0 <= step <= sched.total_steps:
        raise ConfigError(f"step {step} outside [0, {sched.total_steps}]")
    m, n = sched.max_weight, sched.total_steps
    return (m - 1.0) / 2.0 * (1.0 + math.cos(step / n * math.pi + math.pi)) + 1.0


def weight_map(edges: EdgeMap, step: int, sched: Schedule) -> EdgeWeightMap:
    """Per-cell loss weights: progressive_weight on edge cells, exactly 1 off."""
    w = np.ones(edges.bits.shape, dtype=np.float32)
    w[edges.bits] = np.float32(progressive_weight(step, sched))
    return EdgeWeightMap(w)
