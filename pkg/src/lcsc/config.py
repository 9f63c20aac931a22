"""Pipeline configuration: one JSON document drives the whole compile."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .edges import Schedule
from .errors import ConfigError


@dataclass(frozen=True)
class Bucket:
    """Target resolution shared by all samples of one aspect-ratio group."""

    ratio_id: str
    target_height: int
    target_width: int

    @property
    def log_ratio(self) -> float:
        import math

        return math.log(self.target_width / self.target_height)


def _default_buckets() -> tuple[Bucket, ...]:
    # production set: height pinned at 1024, widths snapped to multiples of 64
    return (
        Bucket("1:1", 1024, 1024),
        Bucket("4:3", 1024, 1344),
        Bucket("3:4", 1024, 768),
        Bucket("16:9", 1024, 1792),
        Bucket("9:16", 1024, 576),
    )


@dataclass(frozen=True)
class PipelineConfig:
    channels: int = 1024
    latent_divisor: int = 8
    grid_size: int = 26  # patch grid side of image embeddings (364 / 14)
    drop_rate: float = 0.10
    p_image: float = 0.5
    edge_threshold: float = 0.2
    reference_size: int = 364
    brightness_range: tuple[float, float] = (0.8, 1.2)
    bucket_multiple: int = 64
    buckets: tuple[Bucket, ...] = field(default_factory=_default_buckets)
    schedule: Schedule = field(default_factory=Schedule)
    seed: int = 0
    max_instances: int = 64

    def __post_init__(self):
        if self.channels < 1:
            raise ConfigError("channels must be >= 1")
        if self.latent_divisor < 1:
            raise ConfigError("latent_divisor must be >= 1")
        if not 0.0 <= self.drop_rate <= 1.0:
            raise ConfigError(f"drop_rate must be in [0, 1], got {self.drop_rate}")
        if not 0.0 <= self.p_image <= 1.0:
            raise ConfigError(f"p_image must be in [0, 1], got {self.p_image}")
        if not 0.0 < self.edge_threshold < 1.0:
            raise ConfigError(f"edge_threshold must be in (0, 1), got {self.edge_threshold}")
        if not self.buckets:
            raise ConfigError("bucket list must be nonempty")
        lo, hi = self.brightness_range
        if not 0.0 <= lo <= hi:
            raise ConfigError(f"bad brightness_range {self.brightness_range}")
        for b in self.buckets:
            if b.target_height % self.bucket_multiple or b.target_width % self.bucket_multiple:
                raise ConfigError(
                    f"bucket {b.ratio_id}: {b.target_width}x{b.target_height} "
                    f"not a multiple of {self.bucket_multiple}"
                )


def _parse(doc: dict[str, Any]) -> PipelineConfig:
    kwargs: dict[str, Any] = {}
    simple = (
        "channels",
        "latent_divisor",
        "grid_size",
        "drop_rate",
        "p_image",
        "edge_threshold",
        "reference_size",
        "bucket_multiple",
        "seed",
        "max_instances",
    )
    for key in simple:
        if key in doc:
            kwargs[key] = doc[key]
    if "brightness_range" in doc:
        lo, hi = doc["brightness_range"]
        kwargs["brightness_range"] = (float(lo), float(hi))
    if "buckets" in doc:
        kwargs["buckets"] = tuple(
            Bucket(str(b["id"]), int(b["height"]), int(b["width"])) for b in doc["buckets"]
        )
    if "schedule" in doc:
        s = doc["schedule"]
        kwargs["schedule"] = Schedule(
            max_weight=float(s.get("max_weight", 2.0)),
            total_steps=int(s.get("total_steps", 10000)),
        )
    known = set(simple) | {"brightness_range", "buckets", "schedule"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    return PipelineConfig(**kwargs)


def dump_config(config: PipelineConfig) -> dict[str, Any]:
    """JSON-ready document; feeding it back through load_config round-trips."""
    return {
        "channels": config.channels,
        "latent_divisor": config.latent_divisor,
        "grid_size": config.grid_size,
        "drop_rate": config.drop_rate,
        "p_image": config.p_image,
        "edge_threshold": config.edge_threshold,
        "reference_size": config.reference_size,
        "brightness_range": list(config.brightness_range),
        "bucket_multiple": config.bucket_multiple,
        "buckets": [
            {"id": b.ratio_id, "height": b.target_height, "width": b.target_width}
            for b in config.buckets
        ],
        "schedule": {
            "max_weight": config.schedule.max_weight,
            "total_steps": config.schedule.total_steps,
        },
        "seed": config.seed,
        "max_instances": config.max_instances,
    }


def load_config(path: str | Path) -> PipelineConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    try:
        return _parse(doc)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad config value: {e}") from e
