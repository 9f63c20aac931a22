import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcsc.edges import (
    EdgeMap,
    Schedule,
    downsample_gray,
    progressive_weight,
    sobel_edges,
    to_grayscale,
    weight_map,
)
from lcsc.errors import ConfigError

from oracles import cosine_weight, sobel_scalar


def test_grayscale_uses_luminance_weights():
    rgb = np.zeros((2, 2, 3))
    rgb[0, 0] = (1, 0, 0)
    rgb[0, 1] = (0, 1, 0)
    rgb[1, 0] = (0, 0, 1)
    rgb[1, 1] = (1, 1, 1)
    gray = to_grayscale(rgb)
    np.testing.assert_allclose(
        gray, [[0.299, 0.587], [0.114, 1.0]], atol=1e-12
    )


def test_downsample_preserves_constant():
    np.testing.assert_allclose(downsample_gray(np.full((64, 64), 0.6), 8, 8), 0.6)


def test_sobel_edges_flat_image_has_none():
    assert not sobel_edges(np.full((16, 16), 0.3), 0.2).bits.any()


def test_sobel_edges_step_edge_detected():
    gray = np.zeros((16, 16))
    gray[:, 8:] = 1.0
    edges = sobel_edges(gray, 0.2)
    assert edges.bits[:, 7].all() and edges.bits[:, 8].all()
    assert not edges.bits[:, :6].any() and not edges.bits[:, 10:].any()


def test_sobel_edges_threshold_is_on_normalized_magnitude():
    rng = np.random.default_rng(5)
    gray = rng.uniform(0, 1, (20, 20))
    mag = sobel_scalar(gray)
    want = mag / mag.max() >= 0.35
    got = sobel_edges(gray, 0.35).bits
    assert np.array_equal(got, want)


def test_sobel_edges_scale_invariant():
    rng = np.random.default_rng(6)
    gray = rng.uniform(0, 1, (12, 12))
    a = sobel_edges(gray, 0.25).bits
    b = sobel_edges(gray * 0.1, 0.25).bits
    assert np.array_equal(a, b)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.5, 1.5])
def test_sobel_threshold_range(bad):
    with pytest.raises(ConfigError):
        sobel_edges(np.zeros((4, 4)), bad)


def test_schedule_validation():
    with pytest.raises(ConfigError):
        Schedule(max_weight=0.5)
    with pytest.raises(ConfigError):
        Schedule(total_steps=0)


def test_progressive_weight_endpoints_exact():
    sched = Schedule(max_weight=2.0, total_steps=10000)
    assert abs(progressive_weight(0, sched) - 1.0) < 1e-12
    assert abs(progressive_weight(10000, sched) - 2.0) < 1e-12
    assert abs(progressive_weight(5000, sched) - 1.5) < 1e-12


def test_progressive_weight_matches_formula():
    sched = Schedule(max_weight=3.0, total_steps=977)
    for step in (0, 1, 400, 976, 977):
        assert progressive_weight(step, sched) == pytest.approx(
            cosine_weight(step, 977, 3.0), abs=1e-15
        )


def test_progressive_weight_monotone():
    sched = Schedule(max_weight=2.0, total_steps=500)
    ws = [progressive_weight(s, sched) for s in range(0, 501, 10)]
    assert all(b >= a for a, b in zip(ws, ws[1:]))


def test_progressive_weight_mirror_symmetry():
    # cos ramp: w(s) + w(n - s) == 1 + m
    sched = Schedule(max_weight=2.0, total_steps=1000)
    for s in (0, 100, 333, 500):
        total = progressive_weight(s, sched) + progressive_weight(1000 - s, sched)
        assert total == pytest.approx(3.0, abs=1e-12)


def test_progressive_weight_step_bounds():
    sched = Schedule(total_steps=10)
    with pytest.raises(ConfigError):
        progressive_weight(-1, sched)
    with pytest.raises(ConfigError):
        progressive_weight(11, sched)


def test_weight_map_values():
    bits = np.zeros((4, 4), dtype=bool)
    bits[1, 2] = True
    sched = Schedule(max_weight=2.0, total_steps=100)
    wm = weight_map(EdgeMap(bits), 100, sched).weights
    assert wm.dtype == np.float32
    assert wm[1, 2] == np.float32(2.0)
    off_edge = wm[~bits]
    assert (off_edge == 1.0).all()


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 10**6),
    st.floats(1.0, 64.0, allow_nan=False),
    st.data(),
)
def test_weight_stays_in_range(total, m, data):
    step = data.draw(st.integers(0, total))
    w = progressive_weight(step, Schedule(max_weight=m, total_steps=total))
    assert 1.0 - 1e-12 <= w <= m + 1e-12
