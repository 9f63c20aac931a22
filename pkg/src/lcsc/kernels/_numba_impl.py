"""Numba twins of the kernels in _numpy_impl.py.

Arithmetic order mirrors the numpy implementations exactly: elementwise f64
IEEE operations in the same sequence give bit-identical results, which
test_kernels.py asserts.  Keep the two files in lockstep when editing.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def occupancy_counts(idx, out_h, out_w):
    h, w = idx.shape
    sh = h // out_h
    sw = w // out_w
    n_labels = 0
    for y in range(h):
        for x in range(w):
            if idx[y, x] > n_labels:
                n_labels = idx[y, x]
    counts = np.zeros((n_labels + 1, out_h, out_w), dtype=np.int64)
    for y in range(h):
        oy = y // sh
        for x in range(w):
            counts[idx[y, x], oy, x // sw] += 1
    return counts


@njit(cache=True)
def bilinear_gather(grid, ys, xs):
    gh, gw, c = grid.shape
    k = ys.shape[0]
    out = np.empty((k, c), dtype=np.float32)
    for j in range(k):
        y = min(max(ys[j], 0.0), float(gh - 1))
        x = min(max(xs[j], 0.0), float(gw - 1))
        y0 = int(np.floor(y))
        x0 = int(np.floor(x))
        dy = y - y0
        dx = x - x0
        y1 = min(y0 + 1, gh - 1)
        x1 = min(x0 + 1, gw - 1)
        for ch in range(c):
            v00 = np.float64(grid[y0, x0, ch])
            v01 = np.float64(grid[y0, x1, ch])
            v10 = np.float64(grid[y1, x0, ch])
            v11 = np.float64(grid[y1, x1, ch])
            val = (v00 * (1.0 - dx) + v01 * dx) * (1.0 - dy) + (
                v10 * (1.0 - dx) + v11 * dx
            ) * dy
            out[j, ch] = np.float32(val)
    return out


@njit(cache=True)
def bilinear_resize(src, out_h, out_w):
    h, w, c = src.shape
    sy = h / out_h
    sx = w / out_w
    out = np.empty((out_h, out_w, c), dtype=np.float64)
    for oy in range(out_h):
        y = min(max((oy + 0.5) * sy - 0.5, 0.0), float(h - 1))
        y0 = int(np.floor(y))
        dy = y - y0
        y1 = min(y0 + 1, h - 1)
        for ox in range(out_w):
            x = min(max((ox + 0.5) * sx - 0.5, 0.0), float(w - 1))
            x0 = int(np.floor(x))
            dx = x - x0
            x1 = min(x0 + 1, w - 1)
            for ch in range(c):
                v00 = src[y0, x0, ch]
                v01 = src[y0, x1, ch]
                v10 = src[y1, x0, ch]
                v11 = src[y1, x1, ch]
                out[oy, ox, ch] = (v00 * (1.0 - dx) + v01 * dx) * (1.0 - dy) + (
                    v10 * (1.0 - dx) + v11 * dx
                ) * dy
    return out


@njit(cache=True)
def nearest_resize(src, out_h, out_w):
    h, w = src.shape
    sy = h / out_h
    sx = w / out_w
    out = np.empty((out_h, out_w), dtype=src.dtype)
    for oy in range(out_h):
        ys = min(int((oy + 0.5) * sy), h - 1)
        for ox in range(out_w):
            out[oy, ox] = src[ys, min(int((ox + 0.5) * sx), w - 1)]
    return out


@njit(cache=True)
def _reflect(i, n):
    # reflect-101: mirror about the edge pixel without repeating it
    if i < 0:
        i = -i
    if i >= n:
        i = 2 * n - 2 - i
    return i


@njit(cache=True)
def sobel_magnitude(gray):
    h, w = gray.shape
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        ym = _reflect(y - 1, h)
        yp = _reflect(y + 1, h)
        for x in range(w):
            xm = _reflect(x - 1, w)
            xp = _reflect(x + 1, w)
            a = gray[ym, xm]
            b = gray[ym, x]
            c = gray[ym, xp]
            d = gray[y, xm]
            f = gray[y, xp]
            g = gray[yp, xm]
            hh = gray[yp, x]
            i = gray[yp, xp]
            gx = (c + 2.0 * f + i) - (a + 2.0 * d + g)
            gy = (g + 2.0 * hh + i) - (a + 2.0 * b + c)
            out[y, x] = np.sqrt(gx * gx + gy * gy)
    return out
