import numpy as np
import pytest
from hypothesis import given, strategies as st

from satauth import bitops


def test_int_bits_roundtrip():
    for value in (0, 1, 5, 2**99, 2**100 - 1):
        bits = bitops.int_to_bits(value, 100)
        assert len(bits) == 100
        assert bitops.bits_to_int(bits) == value


def test_int_too_wide_rejected():
    with pytest.raises(ValueError):
        bitops.int_to_bits(1 << 100, 100)
    with pytest.raises(ValueError):
        bitops.int_to_bits(-1, 100)


@given(st.binary(min_size=0, max_size=64))
def test_bytes_bits_roundtrip(data):
    assert bitops.bits_to_bytes(bitops.bytes_to_bits(data)) == data


@given(st.integers(min_value=1, max_value=20), st.integers(min_value=0, max_value=1000))
def test_pack_unpack_uints(width, seed):
    rng = np.random.default_rng(seed)
    vals = rng.integers(0, 1 << width, size=17, dtype=np.int64)
    bits = bitops.pack_uints(vals, width)
    assert len(bits) == 17 * width
    assert np.array_equal(bitops.unpack_uints(bits, width, 17), vals)


@given(st.integers(min_value=0, max_value=5000))
def test_framing_roundtrip(nbits):
    rng = np.random.default_rng(nbits)
    bits = rng.integers(0, 2, size=nbits).astype(np.uint8)
    framed = bitops.frame_bits(bits)
    assert len(framed) % 1 == 0 and isinstance(framed, bytes)
    back = bitops.unframe_bits(framed)
    assert np.array_equal(back, bits)


def test_frame_is_byte_aligned_and_minimal():
    bits = np.ones(5, dtype=np.uint8)
    framed = bitops.frame_bits(bits)
    assert len(framed) == 1  # 5 payload + 3 trailer = 8 bits exactly


def test_xor_bytes_length_check():
    with pytest.raises(ValueError):
        bitops.xor_bytes(b"ab", b"abc")
