"""Biometric fuzzy extractor via the code-offset construction.

``gen`` samples a random codeword of a binary BCH(511, k, t=16) code,
publishes helper data (the biometric XOR the codeword, plus an integrity
digest of the codeword) and derives the biometric key by hashing the
codeword.  ``rep`` shifts a re-scanned biometric by the offset, decodes
to the nearest codeword and returns the same key whenever at most
``CORRECTION_RADIUS`` bits changed; a mis-decode is caught by the
integrity digest, so the caller sees a clean failure instead of a wrong
key.

Biometric templates are 512-bit vectors; the 512th bit is masked with a
random pad bit and ignored by the decoder, so flips there are harmless.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import bitops
from .hashing import h_tagged

BIO_BITS = 512
CORRECTION_RADIUS = 16  # delta: Hamming flips guaranteed recoverable

_GF_BITS = 9
_GF_SIZE = 1 << _GF_BITS
_GF_ORDER = _GF_SIZE - 1  # 511, also the code length
_PRIM_POLY = 0x211  # x^9 + x^4 + 1


class BioMatchError(Exception):
    """The re-scanned biometric is too far from the enrolled one."""


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    alog = np.zeros(_GF_ORDER, dtype=np.int64)
    log = np.zeros(_GF_SIZE, dtype=np.int64)
    x = 1
    for i in range(_GF_ORDER):
        alog[i] = x
        log[x] = i
        x <<= 1
        if x & _GF_SIZE:
            x ^= _PRIM_POLY
    return alog, log


def _poly_mod2(value: int, mod: int) -> int:
    """Remainder of GF(2) polynomial division, polynomials as bit masks."""
    md = mod.bit_length() - 1
    while value.bit_length() - 1 >= md:
        value ^= mod << (value.bit_length() - 1 - md)
    return value


class BchCode:
    """Binary primitive BCH code of length 511 correcting ``t`` errors."""

    def __init__(self, t: int = CORRECTION_RADIUS):
        self.t = t
        self.n = _GF_ORDER
        self.alog, self.log = _build_tables()
        self.generator = self._build_generator()
        self.k = self.n - (self.generator.bit_length() - 1)

    def _minimal_poly(self, s: int) -> int:
        coset = set()
        c = s
        while c not in coset:
            coset.add(c)
            c = c * 2 % _GF_ORDER
        # product of (x + alpha^c) over the conjugates; coefficients land in GF(2)
        poly = [1]
        for c in sorted(coset):
            root = int(self.alog[c])
            nxt = [0] * (len(poly) + 1)
            for d, coef in enumerate(poly):
                nxt[d + 1] ^= coef
                nxt[d] ^= self._gf_mul(coef, root)
            poly = nxt
        mask = 0
        for d, coef in enumerate(poly):
            if coef not in (0, 1):
                raise AssertionError("minimal polynomial left GF(2)")
            mask |= coef << d
        return mask

    def _build_generator(self) -> int:
        g = 1
        seen = set()
        for s in range(1, 2 * self.t, 2):
            coset_min = min(
                {(s * (1 << j)) % _GF_ORDER for j in range(_GF_BITS)}
            )
            if coset_min in seen:
                continue
            seen.add(coset_min)
            g = self._gf2_poly_mul(g, self._minimal_poly(s))
        return g

    @staticmethod
    def _gf2_poly_mul(a: int, b: int) -> int:
        out = 0
        while a:
            if a & 1:
                out ^= b
            a >>= 1
            b <<= 1
        return out

    def _gf_mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.alog[(self.log[a] + self.log[b]) % _GF_ORDER])

    def encode(self, message_bits: np.ndarray) -> np.ndarray:
        """Systematic encoding: message occupies the high-degree positions."""
        if len(message_bits) != self.k:
            raise ValueError(f"message must be {self.k} bits")
        deg = self.n - self.k
        m = bitops.bits_to_int(message_bits)
        shifted = m << deg
        remainder = _poly_mod2(shifted, self.generator)
        return bitops.int_to_bits(shifted ^ remainder, self.n)

    def _syndromes(self, received: np.ndarray) -> np.ndarray:
        pos = np.nonzero(received)[0].astype(np.int64)
        syn = np.zeros(2 * self.t, dtype=np.int64)
        if len(pos) == 0:
            return syn
        for j in range(1, 2 * self.t + 1):
            syn[j - 1] = np.bitwise_xor.reduce(self.alog[(j * pos) % _GF_ORDER])
        return syn

    def decode(self, received: np.ndarray) -> np.ndarray | None:
        """Nearest-codeword decoding; None when beyond the radius."""
        if len(received) != self.n:
            raise ValueError(f"received word must be {self.n} bits")
        syn = self._syndromes(received)
        if not syn.any():
            return received.copy()
        locator = self._berlekamp_massey(syn)
        if locator is None:
            return None
        positions = self._chien_search(locator)
        if positions is None:
            return None
        corrected = received.copy()
        corrected[positions] ^= 1
        if self._syndromes(corrected).any():
            return None
        return corrected

    def _berlekamp_massey(self, syn: np.ndarray) -> list[int] | None:
        c = [1] + [0] * (2 * self.t)
        b = [1] + [0] * (2 * self.t)
        L, m, bb = 0, 1, 1
        for i in range(2 * self.t):
            d = int(syn[i])
            for j in range(1, L + 1):
                d ^= self._gf_mul(c[j], int(syn[i - j]))
            if d == 0:
                m += 1
            elif 2 * L <= i:
                t_ = c.copy()
                coef = self._gf_mul(d, self._gf_inv(bb))
                for j in range(2 * self.t + 1 - m):
                    c[j + m] ^= self._gf_mul(coef, b[j])
                L = i + 1 - L
                b, bb, m = t_, d, 1
            else:
                coef = self._gf_mul(d, self._gf_inv(bb))
                for j in range(2 * self.t + 1 - m):
                    c[j + m] ^= self._gf_mul(coef, b[j])
                m += 1
        if L > self.t:
            return None
        return c[: L + 1]

    def _gf_inv(self, a: int) -> int:
        return int(self.alog[(-self.log[a]) % _GF_ORDER])

    def _chien_search(self, locator: list[int]) -> np.ndarray | None:
        degree = len(locator) - 1
        i = np.arange(_GF_ORDER, dtype=np.int64)
        acc = np.full(_GF_ORDER, locator[0], dtype=np.int64)
        for d in range(1, degree + 1):
            if locator[d] == 0:
                continue
            exp = (self.log[locator[d]] - d * i) % _GF_ORDER
            acc ^= self.alog[exp]
        positions = np.nonzero(acc == 0)[0]
        if len(positions) != degree:
            return None
        return positions


@lru_cache(maxsize=1)
def default_code() -> BchCode:
    return BchCode()


@dataclass(frozen=True)
class BioHelper:
    """Public helper data: offset bits plus codeword integrity digest."""

    offset: np.ndarray  # BIO_BITS bits
    check: bytes  # 32 bytes

    def __post_init__(self):
        self.offset.setflags(write=False)


@dataclass(frozen=True)
class BioExtract:
    sigma: bytes  # 256-bit biometric key
    helper: BioHelper


def gen(bio: np.ndarray, rng: np.random.Generator) -> BioExtract:
    """Enroll a biometric: fresh random codeword, public offset, hashed key.

    The integrity digest binds the offset as well as the codeword, so a
    tampered helper fails cleanly even though the decoder would absorb
    small offset perturbations.
    """
    if len(bio) != BIO_BITS:
        raise ValueError(f"biometric must be {BIO_BITS} bits")
    code = default_code()
    message = rng.integers(0, 2, size=code.k, dtype=np.int64).astype(np.uint8)
    codeword = code.encode(message)
    pad = rng.integers(0, 2, size=BIO_BITS - code.n, dtype=np.int64).astype(np.uint8)
    offset = bitops.xor_bits(bio, np.concatenate([codeword, pad]))
    return BioExtract(
        sigma=h_tagged("fuzzy-key", codeword),
        helper=BioHelper(offset=offset, check=h_tagged("fuzzy-check", codeword, offset)),
    )


def rep(bio_star: np.ndarray, helper: BioHelper) -> bytes:
    """Recover the biometric key from a noisy re-scan; raise on mismatch."""
    if len(bio_star) != BIO_BITS:
        raise ValueError(f"biometric must be {BIO_BITS} bits")
    code = default_code()
    candidate = bitops.xor_bits(bio_star, helper.offset)[: code.n]
    codeword = code.decode(candidate)
    if codeword is None or h_tagged("fuzzy-check", codeword, helper.offset) != helper.check:
        raise BioMatchError("biometric does not match")
    return h_tagged("fuzzy-key", codeword)


def random_biometric(rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=BIO_BITS, dtype=np.int64).astype(np.uint8)


def flip_bits(bio: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """A copy of ``bio`` with ``count`` distinct positions flipped."""
    out = bio.copy()
    positions = rng.choice(len(bio), size=count, replace=False)
    out[positions] ^= 1
    return out
