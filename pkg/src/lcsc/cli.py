"""Command-line front end: compile a corpus, inspect containers, validate
annotations.

A corpus directory looks like::

    corpus/
      captions.json            caption key -> prompt text
      embeddings/              flat store (manifest.json + blob.bin)
      samples/<source_id>/
        annotation.json        layout document (see instructions module)
        labels.png             16-bit instance id image, 0 = background
        image.png              optional RGB ground truth

``compile`` writes one ``<source_id>.lcsc`` container per sample. Batch runs
are deterministic for a given seed: per-sample seeds are derived from the
base seed and the source id, never from worker scheduling, so --jobs only
changes wall time.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import sys
import time
from pathlib import Path

import numpy as np
from PIL import Image

from . import kernels
from .config import PipelineConfig, load_config
from .edges import to_grayscale
from .embeddings import FileStore
from .errors import ConfigError, LcscError
from .instructions import ingest_panoptic
from .pipeline import compile_sample
from .seeding import derive_seed
from .store import read_records, write_sample

_ctx: dict = {}


def _load_labels(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img).astype(np.int32)


def _load_rgb(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        rgb = np.asarray(img.convert("RGB"), dtype=np.float32)
    return rgb / 255.0


def _init_worker(input_root: str, output_root: str, config_path: str | None,
                 seed: int | None, step: int) -> None:
    kernels.warmup()  # pay any JIT cost here, not inside the first sample
    config = load_config(config_path) if config_path else PipelineConfig()
    root = Path(input_root)
    _ctx.update(
        config=config,
        input_root=root,
        output_root=Path(output_root),
        captions=json.loads((root / "captions.json").read_text()),
        provider=FileStore(root / "embeddings", config.channels, config.grid_size),
        seed=config.seed if seed is None else seed,
        step=step,
    )


def _compile_one(source_id: str) -> tuple[str, str | None, float]:
    """Compile a single sample; returns (source_id, error or None, seconds)."""
    t0 = time.perf_counter()
    try:
        cfg: PipelineConfig = _ctx["config"]
        sample_dir = _ctx["input_root"] / "samples" / source_id
        annotation = json.loads((sample_dir / "annotation.json").read_text())
        labels = _load_labels(sample_dir / "labels.png")
        instr = ingest_panoptic(
            annotation, labels, _ctx["captions"], max_instances=cfg.max_instances
        )
        image_path = sample_dir / "image.png"
        rgb = _load_rgb(image_path) if image_path.exists() else None
        gray = to_grayscale(rgb) if rgb is not None else None
        sample = compile_sample(
            instr,
            gray,
            _ctx["provider"],
            cfg,
            step=_ctx["step"],
            seed=derive_seed(_ctx["seed"], source_id),
            source_id=source_id,
            id_mask=labels,
            image_rgb=rgb,
        )
        write_sample(sample, _ctx["output_root"] / f"{source_id}.lcsc")
    except (LcscError, OSError, ValueError, KeyError) as exc:
        return source_id, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0
    return source_id, None, time.perf_counter() - t0


def _list_samples(input_root: Path) -> list[str]:
    samples = input_root / "samples"
    if not samples.is_dir():
        raise ConfigError(f"no samples directory under {input_root}")
    return sorted(p.name for p in samples.iterdir() if p.is_dir())


def _resolve_config_path(input_root: Path, explicit: str | None) -> str | None:
    """--config wins; otherwise use the corpus-local config.json if present."""
    if explicit is not None:
        return explicit
    local = input_root / "config.json"
    return str(local) if local.is_file() else None


def cmd_compile(args: argparse.Namespace) -> int:
    input_root = Path(args.input)
    output_root = Path(args.output)
    output_root.mkdir(parents=True, exist_ok=True)
    source_ids = _list_samples(input_root)
    config_path = _resolve_config_path(input_root, args.config)
    init_args = (str(input_root), str(output_root), config_path, args.seed, args.step)

    if args.jobs <= 1:
        _init_worker(*init_args)  # setup (config, store, JIT) excluded from timing
        t0 = time.perf_counter()
        results = [_compile_one(sid) for sid in source_ids]
    else:
        t0 = time.perf_counter()
        with multiprocessing.Pool(
            args.jobs, initializer=_init_worker, initargs=init_args
        ) as pool:
            results = list(pool.imap_unordered(_compile_one, source_ids))
    wall = time.perf_counter() - t0

    results.sort(key=lambda r: r[0])
    failures = [(sid, err) for sid, err, _ in results if err is not None]
    ok = len(results) - len(failures)
    summary = {
        "compiled": ok,
        "failed": len(failures),
        "wall_seconds": round(wall, 4),
        "samples_per_second": round(ok / wall, 2) if wall > 0 else 0.0,
        "errors": {sid: err for sid, err in failures},
    }
    if args.format == "json":
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        for sid, err in failures:
            print(f"FAIL {sid}: {err}", file=sys.stderr)
        print(
            f"compiled {ok}/{len(results)} samples in {wall:.2f}s "
            f"({summary['samples_per_second']} samples/s)"
        )
    return 1 if failures else 0


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        stored = read_records(args.file)
    except LcscError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    report: dict = {"metadata": stored.metadata, "records": {}}
    for name, arr in stored.records.items():
        info: dict = {"shape": list(arr.shape), "dtype": "f32"}
        if name == "lc":
            info["occupied_cells"] = int((arr != 0).any(axis=0).sum())
            info["total_cells"] = int(arr.shape[1] * arr.shape[2])
        if name == "weight_map":
            info["min"] = float(arr.min())
            info["max"] = float(arr.max())
            info["edge_cells"] = int((arr != 1.0).sum())
        report["records"][name] = info
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for k, v in sorted(stored.metadata.items()):
            print(f"{k}: {v}")
        for name, info in report["records"].items():
            extra = {k: v for k, v in info.items() if k not in ("shape", "dtype")}
            tail = " ".join(f"{k}={v}" for k, v in extra.items())
            print(f"record {name} shape={tuple(info['shape'])} {tail}".rstrip())
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    input_root = Path(args.input)
    config_path = _resolve_config_path(input_root, args.config)
    config = load_config(config_path) if config_path else PipelineConfig()
    captions = json.loads((input_root / "captions.json").read_text())
    findings: dict[str, list[str]] = {}
    for sid in _list_samples(input_root):
        sample_dir = input_root / "samples" / sid
        try:
            annotation = json.loads((sample_dir / "annotation.json").read_text())
            labels = _load_labels(sample_dir / "labels.png")
            ingest_panoptic(
                annotation, labels, captions, max_instances=config.max_instances
            )
        except (LcscError, OSError, ValueError, KeyError) as exc:
            findings[sid] = [f"{type(exc).__name__}: {exc}"]
    if args.format == "json":
        print(json.dumps({"checked": True, "findings": findings}, indent=2,
                         sort_keys=True))
    else:
        for sid, msgs in sorted(findings.items()):
            for msg in msgs:
                print(f"{sid}: {msg}", file=sys.stderr)
        clean = sum(1 for _ in _list_samples(input_root)) - len(findings)
        print(f"{clean} valid, {len(findings)} with findings")
    return 1 if findings else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcsc", description="compile layout instructions into control signals"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a corpus into .lcsc containers")
    p.add_argument("--input", required=True, help="corpus root directory")
    p.add_argument("--output", required=True, help="directory for .lcsc files")
    p.add_argument("--config", default=None,
                   help="pipeline config JSON (default: <input>/config.json if present)")
    p.add_argument("--seed", type=int, default=None,
                   help="base seed (overrides config)")
    p.add_argument("--step", type=int, default=0, help="training step for weights")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("inspect", help="describe one .lcsc container")
    p.add_argument("file", help="path to a .lcsc file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("validate", help="check corpus annotations")
    p.add_argument("--input", required=True, help="corpus root directory")
    p.add_argument("--config", default=None,
                   help="pipeline config JSON (default: <input>/config.json if present)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
