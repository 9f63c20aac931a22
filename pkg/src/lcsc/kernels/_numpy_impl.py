"""Pure-numpy kernel implementations.

These are the fallback path and the semantic reference: the numba twins in
_numba_impl.py must perform the same arithmetic in the same order so both
backends produce bit-identical outputs.  All interpolation math runs in
float64 regardless of input dtype; callers cast at the boundary.
"""

from __future__ import annotations

import numpy as np


def occupancy_counts(idx: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Per-cell pixel counts for a dense label image.

    idx is (H, W) integers in [0, n_labels], 0 meaning background.  H and W
    must be exact multiples of out_h / out_w.  Returns int64 counts of shape
    (n_labels + 1, out_h, out_w).
    """
    h, w = idx.shape
    sh, sw = h // out_h, w // out_w
    n_labels = int(idx.max()) if idx.size else 0
    cell = (np.arange(h, dtype=np.int64)[:, None] // sh) * out_w + (
        np.arange(w, dtype=np.int64)[None, :] // sw
    )
    flat = idx.astype(np.int64) * (out_h * out_w) + cell
    counts = np.bincount(flat.ravel(), minlength=(n_labels + 1) * out_h * out_w)
    return counts.reshape(n_labels + 1, out_h, out_w)


def bilinear_gather(grid: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample (gh, gw, C) grid at continuous (ys, xs), border-clamped.

    Coordinates follow the half-pixel-center convention used by ROI Align:
    integer coordinates land exactly on patch centers.  Returns (K, C) f32.
    """
    gh, gw, _ = grid.shape
    g = grid.astype(np.float64)
    y = np.clip(ys, 0.0, float(gh - 1))
    x = np.clip(xs, 0.0, float(gw - 1))
    y0 = np.floor(y).astype(np.int64)
    x0 = np.floor(x).astype(np.int64)
    dy = (y - y0)[:, None]
    dx = (x - x0)[:, None]
    y1 = np.minimum(y0 + 1, gh - 1)
    x1 = np.minimum(x0 + 1, gw - 1)
    v00 = g[y0, x0]
    v01 = g[y0, x1]
    v10 = g[y1, x0]
    v11 = g[y1, x1]
    out = (v00 * (1.0 - dx) + v01 * dx) * (1.0 - dy) + (v10 * (1.0 - dx) + v11 * dx) * dy
    return out.astype(np.float32)


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize (H, W, C) float64 channel-last, half-pixel centers, clamped."""
    h, w, _ = src.shape
    sy = h / out_h
    sx = w / out_w
    y = np.clip((np.arange(out_h, dtype=np.float64) + 0.5) * sy - 0.5, 0.0, float(h - 1))
    x = np.clip((np.arange(out_w, dtype=np.float64) + 0.5) * sx - 0.5, 0.0, float(w - 1))
    y0 = np.floor(y).astype(np.int64)
    x0 = np.floor(x).astype(np.int64)
    dy = (y - y0)[:, None, None]
    dx = (x - x0)[None, :, None]
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    v00 = src[y0[:, None], x0[None, :]]
    v01 = src[y0[:, None], x1[None, :]]
    v10 = src[y1[:, None], x0[None, :]]
    v11 = src[y1[:, None], x1[None, :]]
    return (v00 * (1.0 - dx) + v01 * dx) * (1.0 - dy) + (v10 * (1.0 - dx) + v11 * dx) * dy


def nearest_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbor resize of a 2D array (used for label images)."""
    h, w = src.shape
    ys = np.minimum(((np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h)).astype(np.int64), h - 1)
    xs = np.minimum(((np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w)).astype(np.int64), w - 1)
    return src[ys[:, None], xs[None, :]]


def sobel_magnitude(gray: np.ndarray) -> np.ndarray:
    """3x3 Sobel gradient magnitude with mirrored (reflect-101) borders."""
    p = np.pad(gray.astype(np.float64), 1, mode="reflect")
    a = p[:-2, :-2]
    b = p[:-2, 1:-1]
    c = p[:-2, 2:]
    d = p[1:-1, :-2]
    f = p[1:-1, 2:]
    g = p[2:, :-2]
    hh = p[2:, 1:-1]
    i = p[2:, 2:]
    gx = (c + 2.0 * f + i) - (a + 2.0 * d + g)
    gy = (g + 2.0 * hh + i) - (a + 2.0 * b + c)
    return np.sqrt(gx * gx + gy * gy)
