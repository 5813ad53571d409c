"""Arithmetic in R_q = Z_q[x]/(x^n+1), sampling, and hash-to-ring.

Coefficients are stored canonically in [0, q) as int64; the centered view
onto [-(q-1)/2, (q-1)/2] is computed on demand and round-trips losslessly.
Multiplication runs over a negacyclic number-theoretic transform (the
parameter invariant q = 1 mod 2n guarantees the needed root of unity);
``schoolbook_mul`` keeps an independent O(n^2) oracle for tests.

The discrete Gaussian sampler inverts a cumulative table over the
truncated support [-ceil(12*beta), ceil(12*beta)] so that a seeded
generator reproduces elements exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import _kernels, bitops, instrument
from .params import RingParams


class RingMismatchError(ValueError):
    """Operands built under different ring parameters."""


@dataclass(frozen=True)
class RingElement:
    """A degree-<n polynomial over Z_q with canonical coefficients."""

    coeffs: np.ndarray
    ring: "Ring"

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    def centered(self) -> np.ndarray:
        """Coefficients mapped to [-(q-1)/2, (q-1)/2]."""
        q = self.ring.params.q
        c = self.coeffs.copy()
        c[c > (q - 1) // 2] -= q
        return c

    def pack_bytes(self) -> bytes:
        """Canonical bit-packed byte form (coeff 0 first, LSB first)."""
        return bitops.bits_to_bytes(self.pack_bits())

    def pack_bits(self) -> np.ndarray:
        return bitops.pack_uints(self.coeffs, self.ring.params.coeff_bits)

    def __add__(self, other):
        return self.ring.add(self, other)

    def __sub__(self, other):
        return self.ring.sub(self, other)

    def __mul__(self, other):
        return self.ring.mul(self, other)

    def __eq__(self, other):
        return (
            isinstance(other, RingElement)
            and self.ring.params == other.ring.params
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.ring.params, self.coeffs.tobytes()))


@lru_cache(maxsize=16)
def get_ring(params: RingParams) -> "Ring":
    """Shared arithmetic context; tables are immutable, reuse is safe."""
    return Ring(params)


def _bit_reverse_indices(n: int) -> np.ndarray:
    width = n.bit_length() - 1
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        out[i] = int(format(i, f"0{width}b")[::-1], 2) if width else 0
    return out


class Ring:
    """Arithmetic context: transform tables and the sampler table."""

    def __init__(self, params: RingParams):
        params.validate()
        self.params = params
        n, q = params.n, params.q
        psi = self._find_psi(q, n)
        rev = _bit_reverse_indices(n)
        ipsi = pow(psi, q - 2, q)
        self._psi_rev = np.array([pow(psi, int(r), q) for r in rev], dtype=np.int64)
        self._ipsi_rev = np.array([pow(ipsi, int(r), q) for r in rev], dtype=np.int64)
        self._n_inv = pow(n, q - 2, q)
        self._build_gaussian_table()

    @staticmethod
    def _find_psi(q: int, n: int) -> int:
        # psi^n == -1 suffices for order exactly 2n when n is a power of two
        for g in range(2, q):
            psi = pow(g, (q - 1) // (2 * n), q)
            if pow(psi, n, q) == q - 1:
                return psi
        raise ValueError("no 2n-th root of unity found")

    def _build_gaussian_table(self):
        beta = self.params.beta
        bound = self.params.tail_cut
        support = np.arange(-bound, bound + 1)
        pmf = np.exp(-(support.astype(np.float64) ** 2) / (2 * beta * beta))
        pmf /= pmf.sum()
        self._gauss_support = support
        self._gauss_pmf = pmf
        self._gauss_cdf = np.cumsum(pmf)
        self._gauss_cdf[-1] = 1.0

    @cached_property
    def sampler_variance(self) -> float:
        """Exact variance of one sampler draw (from the table)."""
        return float(np.sum(self._gauss_pmf * self._gauss_support.astype(np.float64) ** 2))

    # -- construction ----------------------------------------------------

    def element(self, coeffs) -> RingElement:
        arr = np.asarray(coeffs, dtype=np.int64) % self.params.q
        if arr.shape != (self.params.n,):
            raise ValueError(f"expected {self.params.n} coefficients")
        return RingElement(arr, self)

    def zero(self) -> RingElement:
        return RingElement(np.zeros(self.params.n, dtype=np.int64), self)

    def one(self) -> RingElement:
        c = np.zeros(self.params.n, dtype=np.int64)
        c[0] = 1
        return RingElement(c, self)

    def from_centered(self, centered) -> RingElement:
        return self.element(np.asarray(centered, dtype=np.int64))

    def unpack_bits(self, bits: np.ndarray) -> RingElement:
        """Inverse of ``RingElement.pack_bits``; rejects coefficients >= q."""
        vals = bitops.unpack_uints(bits, self.params.coeff_bits, self.params.n)
        if np.any(vals >= self.params.q):
            raise ValueError("coefficient out of range")
        return RingElement(vals.astype(np.int64), self)

    def _check(self, *elems: RingElement):
        for e in elems:
            if e.ring.params != self.params:
                raise RingMismatchError("ring parameter mismatch")

    # -- arithmetic ------------------------------------------------------

    def add(self, x: RingElement, y: RingElement) -> RingElement:
        self._check(x, y)
        instrument.COUNTS.ring_add += 1
        return RingElement((x.coeffs + y.coeffs) % self.params.q, self)

    def sub(self, x: RingElement, y: RingElement) -> RingElement:
        self._check(x, y)
        instrument.COUNTS.ring_add += 1
        return RingElement((x.coeffs - y.coeffs) % self.params.q, self)

    def scale(self, x: RingElement, c: int) -> RingElement:
        self._check(x)
        instrument.COUNTS.ring_scale += 1
        return RingElement(
            _kernels.mulmod(x.coeffs, np.int64(c % self.params.q), np.int64(self.params.q)),
            self,
        )

    def mul(self, x: RingElement, y: RingElement) -> RingElement:
        self._check(x, y)
        instrument.COUNTS.ring_mul += 1
        q = self.params.q
        fa = _kernels.ntt_forward(x.coeffs, self._psi_rev, q)
        fb = _kernels.ntt_forward(y.coeffs, self._psi_rev, q)
        fc = _kernels.pointwise(fa, fb, q)
        return RingElement(_kernels.ntt_inverse(fc, self._ipsi_rev, self._n_inv, q), self)

    def schoolbook_mul(self, x: RingElement, y: RingElement) -> RingElement:
        """Direct negacyclic convolution; the oracle for the transform path."""
        self._check(x, y)
        n, q = self.params.n, self.params.q
        # int64 is exact only while n*(q-1)^2 < 2**63; fall back to bigints
        if n * (q - 1) ** 2 < 2**63:
            conv = np.convolve(x.coeffs, y.coeffs)
        else:
            conv = np.convolve(x.coeffs.astype(object), y.coeffs.astype(object))
        folded = np.zeros(n, dtype=conv.dtype)
        folded[: len(conv) - n + 1] += conv[: len(conv) - n + 1]
        if len(conv) > n:
            folded[: len(conv) - n] -= conv[n:]
        return RingElement((folded % q).astype(np.int64), self)

    # -- sampling --------------------------------------------------------

    def sample_gaussian(self, rng: np.random.Generator) -> RingElement:
        instrument.COUNTS.sample += 1
        u = rng.random(self.params.n)
        idx = np.searchsorted(self._gauss_cdf, u, side="right")
        return RingElement(
            (self._gauss_support[idx].astype(np.int64)) % self.params.q, self
        )

    def sample_uniform(self, rng: np.random.Generator) -> RingElement:
        instrument.COUNTS.sample += 1
        return RingElement(
            rng.integers(0, self.params.q, size=self.params.n, dtype=np.int64), self
        )

    def hash_to_ring(self, data: bytes) -> RingElement:
        """Map a byte string to an element via an XOF with rejection sampling."""
        n, q, w = self.params.n, self.params.q, self.params.coeff_bits
        out = np.empty(n, dtype=np.int64)
        filled = 0
        block = 0
        # prefix property of the XOF lets us extend the stream deterministically
        need_bytes = (n * w * 2 + 7) // 8 + 8
        while filled < n:
            block += 1
            stream = hashlib.shake_256(data).digest(need_bytes * block)
            bits = bitops.bytes_to_bits(stream)
            cands = bitops.unpack_uints(bits[: (len(bits) // w) * w], w, len(bits) // w)
            good = cands[cands < q]
            take = min(n, len(good))
            out[:take] = good[:take]
            filled = take
        return RingElement(out, self)
