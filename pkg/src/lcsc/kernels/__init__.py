"""Hot numeric kernels with two interchangeable backends.

The backend is picked once at import from the LCSC_KERNELS environment
variable: "numba" (require the JIT path), "numpy" (force the pure-numpy
fallback), or "auto" (default: numba when importable).  Both backends are
bit-identical; benchmarks/bench_kernels.py compares their speed.
"""

from __future__ import annotations

import importlib
import os

from . import _numpy_impl

_BACKEND = "numpy"
_impl = _numpy_impl

_requested = os.environ.get("LCSC_KERNELS", "auto").lower()
if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"LCSC_KERNELS must be auto|numba|numpy, got {_requested!r}")

if _requested in ("auto", "numba"):
    try:
        _impl = importlib.import_module("._numba_impl", __name__)
        _BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise RuntimeError("LCSC_KERNELS=numba but numba is not importable")

occupancy_counts = _impl.occupancy_counts
bilinear_gather = _impl.bilinear_gather
bilinear_resize = _impl.bilinear_resize
nearest_resize = _impl.nearest_resize
sobel_magnitude = _impl.sobel_magnitude


def backend_name() -> str:
    return _BACKEND


def warmup() -> None:
    """Trigger JIT compilation so timed paths don't pay for it."""
    import numpy as np

    idx = np.zeros((8, 8), dtype=np.int32)
    idx[0, 0] = 1
    occupancy_counts(idx, 2, 2)
    grid = np.zeros((2, 2, 3), dtype=np.float32)
    pos = np.array([0.5], dtype=np.float64)
    bilinear_gather(grid, pos, pos)
    bilinear_resize(np.zeros((4, 4, 1), dtype=np.float64), 2, 2)
    nearest_resize(idx, 4, 4)
    sobel_magnitude(np.zeros((4, 4), dtype=np.float64))
