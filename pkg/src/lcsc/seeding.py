"""Deterministic RNG derivation.

Every random decision in the pipeline flows from a generator derived here, so
identical (seed, identifier) pairs reproduce identical streams on any platform.
Python's builtin hash() is salted per process and must never be used for this.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: int | str) -> int:
    """Collapse (seed, identifier, ...) into a stable 64-bit seed."""
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:8], "little")


def make_rng(*parts: int | str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(*parts)))
