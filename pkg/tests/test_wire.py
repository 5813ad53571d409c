"""Bit-exact codec: reference widths, roundtrips, range checks, framing."""

import numpy as np
import pytest

from satauth import bitops, wire
from satauth.params import PROFILES
from satauth.ring import get_ring

REFERENCE_WIDTHS = {
    "AccessRequest": 19244,
    "AccessResponseUser": 356,
    "AccessForwardTcs": 18888,
    "PreNegRequest": 17864,
    "PreNegResponse": 36552,
    "HandoverRequest": 812,
    "HandoverResponse": 356,
    "RegRequest": 17764,
    "RegResponse": 868,
}


@pytest.fixture(scope="module")
def ring():
    return get_ring(PROFILES["paper"])


def _random_message(cls, ring, rng):
    widths = wire.FieldWidths.for_ring(ring)
    values = {}
    for name, kind in cls.FIELDS:
        if kind in ("id", "ts"):
            values[name] = int(rng.integers(0, 1 << 63))
        elif kind == "hash":
            values[name] = bytes(rng.integers(0, 256, 32, dtype=np.uint8))
        elif kind == "ring":
            values[name] = ring.sample_uniform(rng)
        elif kind == "signal":
            values[name] = rng.integers(0, 2, widths.signal).astype(np.uint8)
    return cls(**values)


def test_paper_profile_reference_sizes(ring):
    report = wire.size_report(ring)
    assert report["ring_element_bits"] == 17408
    assert report["signal_bits"] == 1024
    for kind, width in REFERENCE_WIDTHS.items():
        assert report["per_message"][kind] == width, kind
    assert report["auth_user_bits"] == 19244
    assert report["auth_satellite_bits"] == 356 + 18888 == 19244
    assert report["auth_total_bits"] == 38488


def test_robust_profile_sizes_follow_formula():
    ring = get_ring(PROFILES["robust"])
    report = wire.size_report(ring)
    assert report["ring_element_bits"] == 1024 * 42
    assert (
        report["per_message"]["AccessRequest"]
        == 100 + 100 + 43008 + 1024 + 256 + 256 + 100
    )


@pytest.mark.parametrize("kind", sorted(wire.MESSAGE_KINDS))
def test_roundtrip_every_kind(kind, ring, rng):
    cls = wire.MESSAGE_KINDS[kind]
    widths = wire.FieldWidths.for_ring(ring)
    for _ in range(25):
        msg = _random_message(cls, ring, rng)
        bits = wire.encode(msg, ring)
        assert len(bits) == cls.width(widths)
        back = wire.decode(bits, kind, ring)
        for name, fkind in cls.FIELDS:
            a, b = getattr(msg, name), getattr(back, name)
            if fkind == "signal":
                assert np.array_equal(a, b)
            else:
                assert a == b


@pytest.mark.parametrize("kind", sorted(wire.MESSAGE_KINDS))
def test_roundtrip_bulk_10k(kind, ring):
    """10^4 random messages per kind; elements drawn from a shared pool."""
    cls = wire.MESSAGE_KINDS[kind]
    rng = np.random.default_rng(sum(map(ord, kind)))
    widths = wire.FieldWidths.for_ring(ring)
    pool = [ring.sample_uniform(rng) for _ in range(32)]
    for _ in range(10_000):
        values = {}
        for name, fkind in cls.FIELDS:
            if fkind in ("id", "ts"):
                values[name] = int(rng.integers(0, 1 << 63))
            elif fkind == "hash":
                values[name] = rng.integers(0, 256, 32, dtype=np.uint8).tobytes()
            elif fkind == "ring":
                values[name] = pool[int(rng.integers(len(pool)))]
            else:
                values[name] = rng.integers(0, 2, widths.signal).astype(np.uint8)
        msg = cls(**values)
        back = wire.decode(wire.encode(msg, ring), kind, ring)
        for name, fkind in cls.FIELDS:
            a, b = getattr(msg, name), getattr(back, name)
            if fkind == "signal":
                assert np.array_equal(a, b)
            else:
                assert a == b


def test_fixed_width_property(ring):
    zero = wire.AccessResponseUser(tag=bytes(32), ts=0)
    rng = np.random.default_rng(1)
    other = _random_message(wire.AccessResponseUser, ring, rng)
    assert len(wire.encode(zero, ring)) == len(wire.encode(other, ring)) == 356


def test_truncated_input_length_error(ring, rng):
    msg = _random_message(wire.HandoverResponse, ring, rng)
    bits = wire.encode(msg, ring)
    with pytest.raises(wire.WireLengthError):
        wire.decode(bits[:-1], "HandoverResponse", ring)


def test_coefficient_at_q_range_error(ring, rng):
    msg = _random_message(wire.PreNegRequest, ring, rng)
    bits = wire.encode(msg, ring)
    spans = wire.field_spans("PreNegRequest", ring)
    start, _ = spans["masked_pk"]
    q_bits = bitops.pack_uints(np.array([ring.params.q]), 17)
    bits[start : start + 17] = q_bits
    with pytest.raises(wire.WireRangeError):
        wire.decode(bits, "PreNegRequest", ring)


def test_encode_rejects_out_of_range_fields(ring):
    with pytest.raises(wire.WireRangeError):
        wire.encode(wire.HandoverResponse(tag=bytes(32), ts=1 << 100), ring)
    with pytest.raises(wire.WireRangeError):
        wire.encode(wire.HandoverResponse(tag=bytes(31), ts=0), ring)


def test_field_spans_cover_message(ring):
    spans = wire.field_spans("AccessRequest", ring)
    widths = wire.FieldWidths.for_ring(ring)
    assert spans["tid"] == (0, 100)
    assert spans["ts"][1] == wire.AccessRequest.width(widths)
    total = sum(end - start for start, end in spans.values())
    assert total == 19244


def test_framing_excluded_from_accounting(ring, rng):
    msg = _random_message(wire.AccessRequest, ring, rng)
    bits = wire.encode(msg, ring)
    framed = bitops.frame_bits(bits)
    assert len(bits) == 19244  # reported size: payload bits only
    assert len(framed) * 8 == 19248 + (8 - 19248 % 8) % 8 + (19248 % 8 and 0)
    assert np.array_equal(bitops.unframe_bits(framed), bits)


def test_hex_dump_golden(ring):
    msg = wire.HandoverResponse(tag=bytes(range(32)), ts=12345)
    assert wire.hex_dump(wire.encode(msg, ring)) == (
        "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f"
        "39300000000000000000000020"
    )


def test_vault_field_widths(ring):
    widths = wire.vault_field_widths(ring)
    assert widths == {
        "masked_tid": 100,
        "masked_cred": 256,
        "masked_access_cred": 256,
        "masked_sk": 17408,
        "verifier": 256,
        "bio_helper": 768,
    }
