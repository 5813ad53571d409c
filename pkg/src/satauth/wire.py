"""Bit-exact serialisation of every protocol message.

Field widths: identities and timestamps 100 bits, digests 256 bits,
signal vectors n bits, ring elements n*ceil(log2 q) bits (17 bits per
coefficient under the ``paper`` profile, so an element is 17408 bits).
Fields concatenate in declaration order; coefficients pack LSB-first.
Messages are fixed width per kind; framing to whole bytes happens only at
the outermost layer (see ``bitops.frame_bits``) and the pad trailer is
excluded from all size accounting.

Reference sizes under the paper profile: access request 19244 bits, user
response 356 bits, station forward 18888 bits, 38488 bits total for the
authentication phase.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import ClassVar

import numpy as np

from . import bitops
from .ring import Ring, RingElement

ID_BITS = 100
TS_BITS = 100
HASH_BITS = 256


class WireError(ValueError):
    pass


class WireLengthError(WireError):
    pass


class WireRangeError(WireError):
    pass


@dataclass(frozen=True)
class FieldWidths:
    id: int = ID_BITS
    timestamp: int = TS_BITS
    hash: int = HASH_BITS
    ring_element: int = 0
    signal: int = 0

    @classmethod
    def for_ring(cls, ring: Ring) -> "FieldWidths":
        p = ring.params
        return cls(ring_element=p.n * p.coeff_bits, signal=p.n)


def _width_of(kind: str, widths: FieldWidths) -> int:
    return {
        "id": widths.id,
        "ts": widths.timestamp,
        "hash": widths.hash,
        "ring": widths.ring_element,
        "signal": widths.signal,
    }[kind]


@dataclass(frozen=True)
class Message:
    """Base for fixed-layout protocol messages; FIELDS drives the codec."""

    FIELDS: ClassVar[tuple[tuple[str, str], ...]] = ()
    PHASE: ClassVar[str] = ""

    @classmethod
    def width(cls, widths: FieldWidths) -> int:
        return sum(_width_of(kind, widths) for _, kind in cls.FIELDS)


@dataclass(frozen=True)
class RegRequest(Message):
    user_id: int
    masked_pw: bytes
    pk: RingElement
    FIELDS = (("user_id", "id"), ("masked_pw", "hash"), ("pk", "ring"))
    PHASE = "register"


@dataclass(frozen=True)
class RegResponse(Message):
    masked_tid: int
    masked_cred: bytes
    masked_access_cred: bytes
    vault_key: bytes
    FIELDS = (
        ("masked_tid", "id"),
        ("masked_cred", "hash"),
        ("masked_access_cred", "hash"),
        ("vault_key", "hash"),
    )
    PHASE = "register"


@dataclass(frozen=True)
class PreNegRequest(Message):
    station_id: int
    masked_pk: RingElement
    ts: int
    tag: bytes
    FIELDS = (
        ("station_id", "id"),
        ("masked_pk", "ring"),
        ("ts", "ts"),
        ("tag", "hash"),
    )
    PHASE = "preneg"


@dataclass(frozen=True)
class PreNegResponse(Message):
    tcs_id: int
    tcs_pk: RingElement
    signal: np.ndarray
    ephemeral: RingElement
    masked_verify_key: bytes
    ts: int
    tag: bytes
    FIELDS = (
        ("tcs_id", "id"),
        ("tcs_pk", "ring"),
        ("signal", "signal"),
        ("ephemeral", "ring"),
        ("masked_verify_key", "hash"),
        ("ts", "ts"),
        ("tag", "hash"),
    )
    PHASE = "preneg"


@dataclass(frozen=True)
class AccessRequest(Message):
    tid: int
    tcs_id: int
    ephemeral: RingElement
    signal: np.ndarray
    masked_tag: bytes
    tag: bytes
    ts: int
    FIELDS = (
        ("tid", "id"),
        ("tcs_id", "id"),
        ("ephemeral", "ring"),
        ("signal", "signal"),
        ("masked_tag", "hash"),
        ("tag", "hash"),
        ("ts", "ts"),
    )
    PHASE = "auth"


@dataclass(frozen=True)
class AccessResponseUser(Message):
    tag: bytes
    ts: int
    FIELDS = (("tag", "hash"), ("ts", "ts"))
    PHASE = "auth"


@dataclass(frozen=True)
class AccessForwardTcs(Message):
    tid: int
    ephemeral: RingElement
    signal: np.ndarray
    user_tag: bytes
    ts: int
    FIELDS = (
        ("tid", "id"),
        ("ephemeral", "ring"),
        ("signal", "signal"),
        ("user_tag", "hash"),
        ("ts", "ts"),
    )
    PHASE = "auth"


@dataclass(frozen=True)
class HandoverRequest(Message):
    tid: int
    nsat_id: int
    masked_proof: bytes
    tag: bytes
    ts: int
    FIELDS = (
        ("tid", "id"),
        ("nsat_id", "id"),
        ("masked_proof", "hash"),
        ("tag", "hash"),
        ("ts", "ts"),
    )
    PHASE = "handover"


@dataclass(frozen=True)
class HandoverResponse(Message):
    tag: bytes
    ts: int
    FIELDS = (("tag", "hash"), ("ts", "ts"))
    PHASE = "handover"


MESSAGE_KINDS: dict[str, type[Message]] = {
    cls.__name__: cls
    for cls in (
        RegRequest,
        RegResponse,
        PreNegRequest,
        PreNegResponse,
        AccessRequest,
        AccessResponseUser,
        AccessForwardTcs,
        HandoverRequest,
        HandoverResponse,
    )
}


def _encode_field(value, kind: str, widths: FieldWidths, ring: Ring) -> np.ndarray:
    if kind in ("id", "ts"):
        width = _width_of(kind, widths)
        if not isinstance(value, (int, np.integer)) or value < 0 or value >> width:
            raise WireRangeError(f"{kind} field out of range")
        return bitops.int_to_bits(int(value), width)
    if kind == "hash":
        if not isinstance(value, bytes) or len(value) * 8 != widths.hash:
            raise WireRangeError("digest field must be 32 bytes")
        return bitops.bytes_to_bits(value)
    if kind == "ring":
        if not isinstance(value, RingElement) or value.ring.params != ring.params:
            raise WireRangeError("ring element under wrong parameters")
        return value.pack_bits()
    if kind == "signal":
        arr = np.asarray(value, dtype=np.uint8)
        if arr.shape != (widths.signal,) or arr.max(initial=0) > 1:
            raise WireRangeError("signal field malformed")
        return arr
    raise WireError(f"unknown field kind {kind}")


def _decode_field(bits: np.ndarray, kind: str, widths: FieldWidths, ring: Ring):
    if kind in ("id", "ts"):
        return bitops.bits_to_int(bits)
    if kind == "hash":
        return bitops.bits_to_bytes(bits)
    if kind == "ring":
        try:
            return ring.unpack_bits(bits)
        except ValueError as exc:
            raise WireRangeError(str(exc)) from exc
    if kind == "signal":
        return bits.copy()
    raise WireError(f"unknown field kind {kind}")


def encode(msg: Message, ring: Ring) -> np.ndarray:
    """Concatenate the message fields into its fixed-width bit vector."""
    widths = FieldWidths.for_ring(ring)
    parts = [
        _encode_field(getattr(msg, name), kind, widths, ring)
        for name, kind in msg.FIELDS
    ]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)


def decode(bits: np.ndarray, kind: str | type[Message], ring: Ring) -> Message:
    cls = MESSAGE_KINDS[kind] if isinstance(kind, str) else kind
    widths = FieldWidths.for_ring(ring)
    if len(bits) != cls.width(widths):
        raise WireLengthError(
            f"{cls.__name__} expects {cls.width(widths)} bits, got {len(bits)}"
        )
    values = {}
    cursor = 0
    for name, fkind in cls.FIELDS:
        w = _width_of(fkind, widths)
        values[name] = _decode_field(bits[cursor : cursor + w], fkind, widths, ring)
        cursor += w
    return cls(**values)


def hex_dump(bits: np.ndarray) -> str:
    """Framed hex form for golden-file tests."""
    return bitops.frame_bits(bits).hex()


def field_spans(kind: str | type[Message], ring: Ring) -> dict[str, tuple[int, int]]:
    """Bit span [start, end) of each field inside the encoded message."""
    cls = MESSAGE_KINDS[kind] if isinstance(kind, str) else kind
    widths = FieldWidths.for_ring(ring)
    spans = {}
    cursor = 0
    for name, fkind in cls.FIELDS:
        w = _width_of(fkind, widths)
        spans[name] = (cursor, cursor + w)
        cursor += w
    return spans


# -- device vault at-rest layout -----------------------------------------

VAULT_FIELDS = (
    ("masked_tid", "id"),
    ("masked_cred", "hash"),
    ("masked_access_cred", "hash"),
    ("masked_sk", "ring_bits"),
    ("verifier", "hash"),
    ("bio_helper", "bio"),
)

BIO_HELPER_BITS = 512 + 256  # offset bits + integrity digest


def vault_field_widths(ring: Ring) -> dict[str, int]:
    w = FieldWidths.for_ring(ring)
    out = {}
    for name, kind in VAULT_FIELDS:
        if kind == "ring_bits":
            out[name] = w.ring_element
        elif kind == "bio":
            out[name] = BIO_HELPER_BITS
        else:
            out[name] = _width_of(kind, w)
    return out


def size_report(ring: Ring) -> dict:
    """Analytical per-message and per-party bit counts."""
    widths = FieldWidths.for_ring(ring)
    per_message = {
        name: cls.width(widths) for name, cls in MESSAGE_KINDS.items()
    }
    auth_user = per_message["AccessRequest"]
    auth_satellite = per_message["AccessResponseUser"] + per_message["AccessForwardTcs"]
    return {
        "profile": ring.params.name,
        "ring_element_bits": widths.ring_element,
        "signal_bits": widths.signal,
        "per_message": per_message,
        "auth_user_bits": auth_user,
        "auth_satellite_bits": auth_satellite,
        "auth_total_bits": auth_user + auth_satellite,
    }
