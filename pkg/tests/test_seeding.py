import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcsc.seeding import derive_seed, make_rng

part = st.one_of(st.integers(-(2**64), 2**64), st.text(max_size=40))


@given(st.lists(part, min_size=1, max_size=5))
def test_derive_seed_is_deterministic(parts):
    assert derive_seed(*parts) == derive_seed(*parts)


@given(st.lists(part, min_size=1, max_size=4), st.lists(part, min_size=1, max_size=4))
def test_distinct_part_lists_rarely_collide(a, b):
    # sha256-derived, so any collision here would be a construction bug
    # (e.g. parts concatenated without separators)
    if a != b:
        assert derive_seed(*a) != derive_seed(*b)


def test_seed_separates_adjacent_parts():
    # "ab" + "c" must not alias "a" + "bc"
    assert derive_seed("ab", "c") != derive_seed("a", "bc")
    assert derive_seed(12, 3) != derive_seed(1, 23)


def test_int_and_str_parts_do_not_alias():
    assert derive_seed(5) != derive_seed("5")


def test_make_rng_streams_are_reproducible():
    a = make_rng("stage", 7).random(8)
    b = make_rng("stage", 7).random(8)
    assert np.array_equal(a, b)
    c = make_rng("stage", 8).random(8)
    assert not np.array_equal(a, c)


def test_seed_fits_in_64_bits():
    for parts in [(0,), ("x",), ("a", 1, "b")]:
        s = derive_seed(*parts)
        assert 0 <= s < 2**64
