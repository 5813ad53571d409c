"""Bit-vector helpers shared by the codec, hashing and fuzzy-extractor layers.

Conventions used everywhere in this package:

* a bit vector is a ``numpy.ndarray`` of dtype ``uint8`` holding 0/1 values;
* integers pack least-significant bit first;
* byte strings expand to bits least-significant bit first within each byte;
* multi-value fields (e.g. polynomial coefficients) pack value 0 first.

Frames pad to a whole byte only at the outermost layer; the pad length
travels in a 3-bit trailer that is excluded from all size accounting.
"""

from __future__ import annotations

import numpy as np


def int_to_bits(value: int, width: int) -> np.ndarray:
    if value < 0 or value >> width:
        raise ValueError(f"value {value} does not fit in {width} bits")
    return np.array([(value >> i) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits: np.ndarray) -> int:
    value = 0
    for i, b in enumerate(bits):
        if b:
            value |= 1 << i
    return value


def bytes_to_bits(data: bytes) -> np.ndarray:
    arr = np.frombuffer(data, dtype=np.uint8)
    return ((arr[:, None] >> np.arange(8)) & 1).astype(np.uint8).reshape(-1)


def bits_to_bytes(bits: np.ndarray) -> bytes:
    n = len(bits)
    padded = np.zeros((n + 7) // 8 * 8, dtype=np.uint8)
    padded[:n] = bits
    weights = (1 << np.arange(8)).astype(np.uint8)
    return (padded.reshape(-1, 8) * weights).sum(axis=1).astype(np.uint8).tobytes()


def pack_uints(values: np.ndarray, width: int) -> np.ndarray:
    """Pack an int64 array into a bit vector, ``width`` bits per value."""
    vals = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width, dtype=np.int64)
    return ((vals[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def unpack_uints(bits: np.ndarray, width: int, count: int) -> np.ndarray:
    if len(bits) != width * count:
        raise ValueError("bit vector length does not match width*count")
    mat = bits.reshape(count, width).astype(np.int64)
    weights = (np.int64(1) << np.arange(width, dtype=np.int64))
    return mat @ weights


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("xor operands differ in length")
    return bytes(x ^ y for x, y in zip(a, b))


def xor_bits(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) != len(b):
        raise ValueError("xor operands differ in length")
    return np.bitwise_xor(a, b)


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.count_nonzero(a != b))


PAD_TRAILER_BITS = 3


def frame_bits(bits: np.ndarray) -> bytes:
    """Byte-align a payload; pad length rides in a 3-bit trailer."""
    pad = (8 - (len(bits) + PAD_TRAILER_BITS) % 8) % 8
    stream = np.concatenate(
        [bits, np.zeros(pad, dtype=np.uint8), int_to_bits(pad, PAD_TRAILER_BITS)]
    )
    return bits_to_bytes(stream)


def unframe_bits(data: bytes) -> np.ndarray:
    stream = bytes_to_bits(data)
    if len(stream) < PAD_TRAILER_BITS:
        raise ValueError("frame shorter than trailer")
    pad = bits_to_int(stream[-PAD_TRAILER_BITS:])
    payload_len = len(stream) - PAD_TRAILER_BITS - pad
    if payload_len < 0:
        raise ValueError("inconsistent frame trailer")
    return stream[:payload_len]
