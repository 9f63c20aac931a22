from __future__ import annotations

import numpy as np
import pytest

# Filled by test_acceptance; echoed after the run so the pass/fail lines
# survive pytest's output capture.
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)

from lcsc.config import Bucket, PipelineConfig
from lcsc.edges import Schedule
from lcsc.embeddings import StubProvider
from lcsc.instructions import (
    InstanceDescription,
    InstanceMask,
    InstanceSpec,
    InstructionSet,
)


def small_config(**overrides) -> PipelineConfig:
    base = dict(
        channels=8,
        grid_size=5,
        buckets=(Bucket("1:1", 64, 64),),
        schedule=Schedule(max_weight=2.0, total_steps=100),
    )
    base.update(overrides)
    return PipelineConfig(**base)


def rect_mask(h: int, w: int, y0: int, y1: int, x0: int, x1: int) -> InstanceMask:
    bits = np.zeros((h, w), dtype=bool)
    bits[y0:y1, x0:x1] = True
    return InstanceMask(bits)


def build_instructions(
    size: int,
    rects: list[tuple[int, int, int, int]],
    kinds: list[str] | None = None,
) -> InstructionSet:
    """Disjoint rectangle instances; rects are (y0, y1, x0, x1)."""
    specs = []
    for i, (y0, y1, x0, x1) in enumerate(rects, start=1):
        kind = (kinds or [])[i - 1] if kinds else "text"
        if kind == "image":
            desc = InstanceDescription.image(f"img-{i}")
        else:
            desc = InstanceDescription.text(f"txt-{i}")
        specs.append(
            InstanceSpec(
                rect_mask(size, size, y0, y1, x0, x1),
                desc,
                instance_id=i,
                image_key=f"img-{i}",
            )
        )
    return InstructionSet(
        global_prompt="fixtures",
        instances=tuple(specs),
        image_width=size,
        image_height=size,
    )


@pytest.fixture
def config() -> PipelineConfig:
    return small_config()


@pytest.fixture
def provider(config) -> StubProvider:
    return StubProvider(channels=config.channels, grid_size=config.grid_size, seed=1)
