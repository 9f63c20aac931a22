"""Synthetic corpora: random rectangle layouts rendered as label images,
annotations, captions and a matching embedding store.

Two flavors:

* ``make_corpus`` writes a raw corpus in the layout the CLI compiles
  (annotations + label PNGs + embedding store), for demos and end-to-end
  tests.
* ``make_training_corpus`` compiles small samples directly and writes
  ``.lcsc`` containers that additionally carry a ``target_latent`` record
  (a fixed linear readout of the control signal), giving downstream
  consumers a self-contained regression task.

Run ``python -m lcsc.fixtures --help`` to generate either from the shell.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .config import Bucket, PipelineConfig, dump_config
from .edges import Schedule, to_grayscale
from .embeddings import StoreWriter, StubProvider
from .instructions import ingest_panoptic
from .pipeline import compile_sample
from .seeding import derive_seed, make_rng
from .store import write_sample

PALETTE = {
    "red": (0.85, 0.15, 0.15),
    "green": (0.15, 0.75, 0.2),
    "blue": (0.2, 0.3, 0.9),
    "yellow": (0.9, 0.85, 0.1),
    "purple": (0.6, 0.2, 0.8),
    "cyan": (0.1, 0.8, 0.8),
    "orange": (0.95, 0.55, 0.1),
    "white": (0.95, 0.95, 0.95),
}

_SHAPES = ("box", "block", "panel", "tile")


def demo_config(channels: int = 64, grid_size: int = 26,
                image_size: int = 256, seed: int = 0) -> PipelineConfig:
    """Small config matching the demo corpus dimensions."""
    return PipelineConfig(
        channels=channels,
        grid_size=grid_size,
        buckets=(Bucket("1:1", image_size, image_size),),
        schedule=Schedule(max_weight=2.0, total_steps=1000),
        seed=seed,
    )


def random_layout(
    rng: np.random.Generator,
    height: int,
    width: int,
    colors: list[str],
    max_instances: int = 3,
    with_image_keys: bool = True,
) -> tuple[dict, np.ndarray, np.ndarray]:
    """Place 1..max_instances disjoint rectangles.

    Returns (annotation document, label image, rendered RGB image). Rectangle
    sides span 20-50% of the image so instances survive downsampling.
    """
    n = int(rng.integers(1, max_instances + 1))
    labels = np.zeros((height, width), dtype=np.int32)
    rgb = np.empty((height, width, 3), dtype=np.float64)
    ramp = np.linspace(0.25, 0.55, width)
    rgb[:] = ramp[None, :, None]  # horizontal gradient background

    segments = []
    placed = 0
    for _ in range(50):
        if placed == n:
            break
        h = int(rng.integers(height // 5, height // 2))
        w = int(rng.integers(width // 5, width // 2))
        y = int(rng.integers(0, height - h + 1))
        x = int(rng.integers(0, width - w + 1))
        if labels[y : y + h, x : x + w].any():
            continue
        placed += 1
        color = colors[int(rng.integers(0, len(colors)))]
        labels[y : y + h, x : x + w] = placed
        rgb[y : y + h, x : x + w] = PALETTE[color]
        seg = {"id": placed, "caption_key": f"txt-{color}"}
        if with_image_keys:
            seg["image_key"] = f"img-{color}"
        segments.append(seg)

    names = ", ".join(
        f"a {s['caption_key'][4:]} {_SHAPES[i % len(_SHAPES)]}"
        for i, s in enumerate(segments)
    )
    annotation = {
        "image_width": width,
        "image_height": height,
        "global_prompt": f"a scene with {names}",
        "segments": segments,
    }
    return annotation, labels, rgb


def _write_label_png(path: Path, labels: np.ndarray) -> None:
    if labels.max() > 0xFFFF or labels.min() < 0:
        raise ValueError("labels exceed 16-bit range")
    h, w = labels.shape
    img = Image.frombytes("I;16", (w, h), labels.astype("<u2").tobytes())
    img.save(path)


def _write_rgb_png(path: Path, rgb: np.ndarray) -> None:
    Image.fromarray((np.clip(rgb, 0.0, 1.0) * 255).round().astype(np.uint8)).save(path)


def write_embedding_store(
    root: Path, channels: int, grid_size: int, colors: list[str], seed: int = 0
) -> StubProvider:
    """Materialize stub embeddings for every color as both text and image
    entries; FileStore reads of these keys match the returned StubProvider."""
    stub = StubProvider(channels=channels, grid_size=grid_size, seed=seed)
    writer = StoreWriter(root)
    for color in colors:
        writer.add_text(f"txt-{color}", stub.get_text(f"txt-{color}").values)
        emb = stub.get_image(f"img-{color}")
        writer.add_image(f"img-{color}", emb.spatial, emb.global_vec)
    writer.finalize()
    return stub


def make_corpus(
    root: str | Path,
    n_samples: int = 4,
    image_size: int = 256,
    channels: int = 64,
    grid_size: int = 26,
    seed: int = 0,
    with_images: bool = True,
    with_image_keys: bool = True,
    max_instances: int = 3,
) -> Path:
    """Write a compile-ready corpus under root; returns root."""
    root = Path(root)
    colors = list(PALETTE)
    write_embedding_store(root / "embeddings", channels, grid_size, colors, seed)
    captions = {f"txt-{c}": f"a {c} rectangle" for c in colors}
    (root / "captions.json").write_text(json.dumps(captions, indent=1, sort_keys=True))
    config = demo_config(channels=channels, grid_size=grid_size,
                         image_size=image_size, seed=seed)
    (root / "config.json").write_text(
        json.dumps(dump_config(config), indent=1, sort_keys=True)
    )
    for i in range(n_samples):
        sid = f"sample-{i:04d}"
        rng = make_rng("corpus", seed, sid)
        annotation, labels, rgb = random_layout(
            rng, image_size, image_size, colors,
            max_instances=max_instances, with_image_keys=with_image_keys,
        )
        sample_dir = root / "samples" / sid
        sample_dir.mkdir(parents=True, exist_ok=True)
        (sample_dir / "annotation.json").write_text(
            json.dumps(annotation, indent=1, sort_keys=True)
        )
        _write_label_png(sample_dir / "labels.png", labels)
        if with_images:
            _write_rgb_png(sample_dir / "image.png", rgb)
    return root


TOY_CHANNELS = 8
TOY_TARGET_CHANNELS = 4
TOY_IMAGE_SIZE = 128
TOY_READOUT_SCALE = 0.5


def toy_config(seed: int = 0) -> PipelineConfig:
    return PipelineConfig(
        channels=TOY_CHANNELS,
        grid_size=6,
        p_image=0.0,  # text only: every occupied cell carries a full embedding
        buckets=(Bucket("1:1", TOY_IMAGE_SIZE, TOY_IMAGE_SIZE),),
        schedule=Schedule(max_weight=2.0, total_steps=1000),
        seed=seed,
    )


def make_training_corpus(
    root: str | Path, n_samples: int = 64, seed: int = 7
) -> Path:
    """Compile toy samples (8-channel signal on a 16x16 latent) and attach a
    ``target_latent`` record: the first four signal channels scaled by 0.5.

    A consumer that conditions on the signal can predict the target exactly;
    one that cannot see it has to guess the layout. The gap between the two
    is the regression the corpus exists to measure.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    config = toy_config(seed)
    colors = list(PALETTE)
    stub = StubProvider(channels=TOY_CHANNELS, grid_size=6, seed=seed)
    for i in range(n_samples):
        sid = f"toy-{i:04d}"
        rng = make_rng("toy-corpus", seed, sid)
        annotation, labels, rgb = random_layout(
            rng, TOY_IMAGE_SIZE, TOY_IMAGE_SIZE, colors, with_image_keys=False
        )
        captions = {f"txt-{c}": f"a {c} rectangle" for c in colors}
        instr = ingest_panoptic(annotation, labels, captions)
        sample = compile_sample(
            instr,
            to_grayscale(rgb),
            stub,
            config,
            step=config.schedule.total_steps,  # edge weights at full strength
            seed=derive_seed(seed, sid),
            source_id=sid,
            id_mask=labels,
        )
        target = TOY_READOUT_SCALE * sample.lc.values[:TOY_TARGET_CHANNELS]
        write_sample(sample, root / f"{sid}.lcsc",
                     extra_records={"target_latent": target})
    (root / "corpus.json").write_text(json.dumps({
        "channels": TOY_CHANNELS,
        "target_channels": TOY_TARGET_CHANNELS,
        "readout_scale": TOY_READOUT_SCALE,
        "samples": n_samples,
        "seed": seed,
    }, indent=1, sort_keys=True))
    return root


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m lcsc.fixtures", description="generate synthetic corpora"
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--kind", choices=("raw", "compiled"), default="raw",
                        help="raw corpus for the CLI, or compiled .lcsc files")
    parser.add_argument("--samples", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if args.kind == "raw":
        make_corpus(args.out, n_samples=args.samples, seed=args.seed)
    else:
        make_training_corpus(args.out, n_samples=args.samples, seed=args.seed)
    print(f"wrote {args.samples} {args.kind} samples to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
