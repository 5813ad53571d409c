"""Canonical hashing of heterogeneous protocol values.

Every party must hash identical byte streams, so each value type has one
canonical encoding: non-negative integers as 16 big-endian bytes, byte
strings raw, bit vectors packed, ring elements in their bit-packed wire
form.  Items are kind-tagged and length-prefixed, which makes the tupling
injective.

``expand_mask`` and ``trunc_int`` are the width adapters used wherever a
256-bit digest masks a field of a different width.
"""

from __future__ import annotations

import hashlib

import numpy as np

from . import bitops, instrument

HASH_BYTES = 32
HASH_BITS = 256


def canonical_bytes(*items) -> bytes:
    parts = []
    for item in items:
        if isinstance(item, bytes):
            parts.append(b"B" + len(item).to_bytes(4, "big") + item)
        elif isinstance(item, str):
            data = item.encode("utf-8")
            parts.append(b"T" + len(data).to_bytes(4, "big") + data)
        elif isinstance(item, (int, np.integer)):
            if item < 0:
                raise ValueError("negative integers have no canonical form")
            parts.append(b"I" + int(item).to_bytes(16, "big"))
        elif isinstance(item, np.ndarray) and item.dtype == np.uint8:
            parts.append(
                b"S" + len(item).to_bytes(4, "big") + bitops.bits_to_bytes(item)
            )
        elif hasattr(item, "pack_bytes"):
            data = item.pack_bytes()
            parts.append(b"R" + len(data).to_bytes(4, "big") + data)
        else:
            raise TypeError(f"no canonical encoding for {type(item)!r}")
    return b"".join(parts)


def h_items(*items) -> bytes:
    """The system hash: 256 bits over the canonical tupling."""
    instrument.COUNTS.hash += 1
    return hashlib.sha256(canonical_bytes(*items)).digest()


def h_tagged(tag: str, *items) -> bytes:
    """Domain-separated hash for internal derivations (kdf, masks, codes)."""
    return h_items("#" + tag, *items)


def expand_mask(seed: bytes, nbits: int) -> np.ndarray:
    """Deterministic counter-mode expansion of a digest to nbits."""
    blocks = []
    need = (nbits + 7) // 8
    ctr = 0
    while need > 0:
        block = hashlib.sha256(b"satauth-expand" + seed + ctr.to_bytes(4, "big")).digest()
        blocks.append(block)
        need -= len(block)
        ctr += 1
    return bitops.bytes_to_bits(b"".join(blocks))[:nbits]


def trunc_int(digest: bytes, width: int) -> int:
    """First ``width`` bits of a digest as an integer (LSB-first stream)."""
    return bitops.bits_to_int(bitops.bytes_to_bits(digest)[:width])
