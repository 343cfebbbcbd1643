from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from discrete_wasserstein.rng import SplitMix64, derive_seed, mix64

# Reference outputs of SplitMix64 started from state 0.
SEED0 = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_reference_vector():
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == SEED0


def test_frozen_derived_seeds():
    # Golden values: changing the stream silently would break every fixture.
    assert derive_seed(0, 0) == mix64(0 ^ mix64(0x9E3779B97F4A7C15))
    assert derive_seed(0) == 0
    assert derive_seed(7, 1) != derive_seed(7, 2)
    assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)


def test_below_range_and_rough_uniformity():
    rng = SplitMix64(123)
    counts = Counter(rng.below(6) for _ in range(6000))
    assert set(counts) == set(range(6))
    assert all(800 < c < 1200 for c in counts.values())


def test_below_rejects_nonpositive():
    with pytest.raises(ValueError):
        SplitMix64(1).below(0)


def test_wide_values():
    rng = SplitMix64(5)
    big = 1 << 100
    assert all(0 <= rng.below(big) < big for _ in range(50))


@given(st.integers(0, 2**64 - 1), st.integers(0, 20))
def test_sample_is_distinct_and_deterministic(seed, k):
    pool = list(range(20))
    a = SplitMix64(seed).sample(pool, k)
    assert a == SplitMix64(seed).sample(pool, k)
    assert len(set(a)) == k and set(a) <= set(pool)


@given(st.integers(0, 2**64 - 1))
def test_shuffle_is_a_permutation(seed):
    assert sorted(SplitMix64(seed).shuffle(range(10))) == list(range(10))


@given(st.integers(0, 2**64 - 1), st.integers(-5, 5), st.integers(0, 10))
def test_integer_bounds(seed, lo, width):
    assert lo <= SplitMix64(seed).integer(lo, lo + width) <= lo + width
