"""Benchmark the numba kernels against the pure-numpy fallback.

Both backends are imported directly (bypassing the LCSC_KERNELS dispatch)
and timed on workloads shaped like the hot paths of sample compilation:
label-occupancy counting, ROI-style bilinear gathers, image resizes, and
Sobel edge extraction.  Reported numbers are the median wall time of
``--repeats`` runs after a warmup call, so numba's one-off JIT cost is
excluded (pass ``--include-jit`` to see it).

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --json
    python3 benchmarks/bench_kernels.py --end-to-end

``--end-to-end`` additionally generates a small corpus and times the full
``lcsc compile`` CLI in a subprocess under LCSC_KERNELS=numpy and =numba.
"""

from __future__ import annotations

import argparse
import importlib
import json
import os
import statistics
import subprocess
import sys
import tempfile
import time
from collections.abc import Callable

import numpy as np

from lcsc.kernels import _numpy_impl


def _make_workloads(rng: np.random.Generator) -> list[tuple[str, str, Callable[[object], object]]]:
    """Return (name, description, runner) triples; runner takes an impl module."""
    labels = np.zeros((1024, 1024), dtype=np.int32)
    for i in range(1, 9):
        y, x = rng.integers(0, 768, size=2)
        labels[y : y + 256, x : x + 256] = i

    grid = rng.standard_normal((26, 26, 256)).astype(np.float32)
    ys = rng.uniform(-0.5, 25.5, size=4096)
    xs = rng.uniform(-0.5, 25.5, size=4096)

    gray = rng.random((1024, 1024, 1))
    rgb = rng.random((1024, 1024, 3))
    small_gray = rng.random((128, 128))

    return [
        (
            "occupancy_counts",
            "1024x1024 labels, 9 ids -> 128x128 cells",
            lambda m: m.occupancy_counts(labels, 128, 128),
        ),
        (
            "bilinear_gather",
            "26x26x256 grid, 4096 sample points",
            lambda m: m.bilinear_gather(grid, ys, xs),
        ),
        (
            "bilinear_resize gray",
            "1024x1024x1 -> 128x128 (edge-map downsample)",
            lambda m: m.bilinear_resize(gray, 128, 128),
        ),
        (
            "bilinear_resize rgb",
            "1024x1024x3 -> 364x364 (reference crop)",
            lambda m: m.bilinear_resize(rgb, 364, 364),
        ),
        (
            "nearest_resize",
            "1024x1024 labels -> 512x512",
            lambda m: m.nearest_resize(labels, 512, 512),
        ),
        (
            "sobel_magnitude",
            "128x128 luminance plane",
            lambda m: m.sobel_magnitude(small_gray),
        ),
    ]


def _time_one(runner: Callable[[object], object], impl: object, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        runner(impl)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench_kernels(repeats: int, include_jit: bool, seed: int) -> list[dict[str, object]]:
    try:
        numba_impl = importlib.import_module("lcsc.kernels._numba_impl")
    except ImportError:
        numba_impl = None

    workloads = _make_workloads(np.random.default_rng(seed))
    rows: list[dict[str, object]] = []
    for name, desc, runner in workloads:
        row: dict[str, object] = {"kernel": name, "workload": desc}
        if numba_impl is not None:
            t0 = time.perf_counter()
            runner(numba_impl)  # warmup / JIT
            jit = time.perf_counter() - t0
            if include_jit:
                row["numba_first_call_s"] = round(jit, 3)
            row["numba_ms"] = round(_time_one(runner, numba_impl, repeats) * 1e3, 3)
        runner(_numpy_impl)  # fair warmup (page-in, allocator)
        row["numpy_ms"] = round(_time_one(runner, _numpy_impl, repeats) * 1e3, 3)
        if numba_impl is not None:
            row["speedup"] = round(row["numpy_ms"] / max(row["numba_ms"], 1e-9), 2)
        rows.append(row)
    return rows


def bench_end_to_end(samples: int, jobs: int) -> list[dict[str, object]]:
    """Time the compile CLI under each backend on a generated corpus."""
    rows = []
    with tempfile.TemporaryDirectory() as tmp:
        corpus = os.path.join(tmp, "corpus")
        subprocess.run(
            [sys.executable, "-m", "lcsc.fixtures", "--out", corpus, "--samples", str(samples)],
            check=True,
            capture_output=True,
        )
        for backend in ("numpy", "numba"):
            env = dict(os.environ, LCSC_KERNELS=backend)
            out_dir = os.path.join(tmp, f"out-{backend}")
            proc = subprocess.run(
                [
                    sys.executable,
                    "-m",
                    "lcsc.cli",
                    "compile",
                    "--input",
                    corpus,
                    "--output",
                    out_dir,
                    "--jobs",
                    str(jobs),
                    "--format",
                    "json",
                ],
                env=env,
                capture_output=True,
                text=True,
            )
            if proc.returncode != 0:
                rows.append({"backend": backend, "error": proc.stderr.strip()[-400:]})
                continue
            summary = json.loads(proc.stdout)
            rows.append(
                {
                    "backend": backend,
                    "samples": summary["compiled"],
                    "samples_per_second": round(summary["samples_per_second"], 1),
                }
            )
    return rows


def _print_table(rows: list[dict[str, object]], columns: list[str]) -> None:
    widths = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows)) for c in columns}
    header = "  ".join(c.ljust(widths[c]) for c in columns)
    print(header)
    print("-" * len(header))
    for r in rows:
        print("  ".join(str(r.get(c, "-")).ljust(widths[c]) for c in columns))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=30, help="timed runs per kernel (median reported)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", action="store_true", help="emit machine-readable results")
    parser.add_argument("--include-jit", action="store_true", help="also report numba first-call time")
    parser.add_argument("--end-to-end", action="store_true", help="time the compile CLI under both backends")
    parser.add_argument("--samples", type=int, default=16, help="corpus size for --end-to-end")
    parser.add_argument("--jobs", type=int, default=1, help="worker count for --end-to-end")
    args = parser.parse_args(argv)

    kernel_rows = bench_kernels(args.repeats, args.include_jit, args.seed)
    e2e_rows = bench_end_to_end(args.samples, args.jobs) if args.end_to_end else []

    if args.json:
        print(json.dumps({"kernels": kernel_rows, "end_to_end": e2e_rows}, indent=2))
        return 0

    columns = ["kernel", "workload", "numba_ms", "numpy_ms", "speedup"]
    if args.include_jit:
        columns.insert(2, "numba_first_call_s")
    if not any("numba_ms" in r for r in kernel_rows):
        print("note: numba backend not importable; showing numpy only")
        columns = ["kernel", "workload", "numpy_ms"]
    _print_table(kernel_rows, columns)
    if e2e_rows:
        print()
        _print_table(e2e_rows, ["backend", "samples", "samples_per_second"])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
