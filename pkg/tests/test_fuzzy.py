"""Code-offset fuzzy extractor: recovery radius and helper-data hygiene."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from satauth import fuzzy


def test_code_parameters():
    code = fuzzy.default_code()
    assert code.n == 511
    assert code.t == 16
    assert code.k == code.n - (code.generator.bit_length() - 1)
    assert code.k >= 367


def test_encode_decode_exact(rng):
    code = fuzzy.default_code()
    msg = rng.integers(0, 2, size=code.k).astype(np.uint8)
    cw = code.encode(msg)
    assert np.array_equal(code.decode(cw), cw)


@pytest.mark.parametrize("errors", [1, 8, 16])
def test_decode_within_radius(errors, rng):
    code = fuzzy.default_code()
    for _ in range(25):
        cw = code.encode(rng.integers(0, 2, size=code.k).astype(np.uint8))
        received = cw.copy()
        pos = rng.choice(code.n, size=errors, replace=False)
        received[pos] ^= 1
        assert np.array_equal(code.decode(received), cw)


def test_gen_is_probabilistic(rng):
    bio = fuzzy.random_biometric(rng)
    e1 = fuzzy.gen(bio, np.random.default_rng(1))
    e2 = fuzzy.gen(bio, np.random.default_rng(2))
    assert not np.array_equal(e1.helper.offset, e2.helper.offset)
    assert e1.sigma != e2.sigma


def test_sigma_width_and_roundtrip(rng):
    bio = fuzzy.random_biometric(rng)
    extract = fuzzy.gen(bio, rng)
    assert len(extract.sigma) == 32
    assert fuzzy.rep(bio, extract.helper) == extract.sigma


def test_rep_within_radius(rng):
    bio = fuzzy.random_biometric(rng)
    extract = fuzzy.gen(bio, rng)
    for _ in range(1000):
        noisy = fuzzy.flip_bits(bio, fuzzy.CORRECTION_RADIUS, rng)
        assert fuzzy.rep(noisy, extract.helper) == extract.sigma


def test_rep_beyond_radius_fails(rng):
    bio = fuzzy.random_biometric(rng)
    extract = fuzzy.gen(bio, rng)
    flips = (2 * fuzzy.CORRECTION_RADIUS + 1) * 3
    for _ in range(1000):
        noisy = fuzzy.flip_bits(bio, flips, rng)
        with pytest.raises(fuzzy.BioMatchError):
            fuzzy.rep(noisy, extract.helper)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=fuzzy.CORRECTION_RADIUS), st.integers(0, 10**6))
def test_rep_any_error_pattern_within_radius(weight, seed):
    rng = np.random.default_rng(seed)
    bio = fuzzy.random_biometric(rng)
    extract = fuzzy.gen(bio, rng)
    noisy = fuzzy.flip_bits(bio, weight, rng) if weight else bio
    assert fuzzy.rep(noisy, extract.helper) == extract.sigma


def test_helper_serialises_to_documented_width(rng):
    bio = fuzzy.random_biometric(rng)
    extract = fuzzy.gen(bio, rng)
    assert len(extract.helper.offset) == 512
    assert len(extract.helper.check) * 8 == 256


def test_sigma_distribution_uniform_bucketed():
    """Hash-bucket fresh sigmas; a chi-square test should not reject."""
    from scipy import stats

    rng = np.random.default_rng(13)
    bio = fuzzy.random_biometric(rng)
    buckets = np.zeros(16, dtype=np.int64)
    samples = 1200
    for i in range(samples):
        sigma = fuzzy.gen(bio, np.random.default_rng(1000 + i)).sigma
        buckets[sigma[0] % 16] += 1
    expected = samples / 16
    chi2 = float(((buckets - expected) ** 2 / expected).sum())
    assert chi2 < stats.chi2.ppf(0.999, 15)


def test_bad_biometric_length_rejected(rng):
    with pytest.raises(ValueError):
        fuzzy.gen(np.zeros(100, dtype=np.uint8), rng)
    bio = fuzzy.random_biometric(rng)
    extract = fuzzy.gen(bio, rng)
    with pytest.raises(ValueError):
        fuzzy.rep(np.zeros(100, dtype=np.uint8), extract.helper)
