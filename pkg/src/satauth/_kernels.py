"""Hot numeric kernels: negacyclic NTT butterflies and modular multiply.

Two interchangeable backends produce bit-identical results:

* ``numba`` -- scalar loops compiled with ``@njit`` (default when numba
  imports cleanly);
* ``numpy`` -- stage-vectorised pure-numpy fallback.

Selection: set ``SATAUTH_BACKEND=numpy`` (or ``numba``) in the environment
before import.  ``satauth bench`` times both paths side by side.

All arithmetic stays inside int64.  Products are kept below 2**63 by
splitting one operand at 21 bits, which is safe for any modulus below
2**42 (both built-in profiles qualify).
"""

from __future__ import annotations

import os

import numpy as np

_MASK21 = np.int64((1 << 21) - 1)

_ENV_FLAG = "SATAUTH_BACKEND"


def _numpy_mulmod(a, b, q):
    """(a*b) mod q without overflow for q < 2**42; a, b in [0, q)."""
    hi = (a * (b >> 21)) % q
    return ((hi << 21) + a * (b & _MASK21)) % q


def _numpy_ntt_forward(a: np.ndarray, psi_rev: np.ndarray, q: int) -> np.ndarray:
    """Forward negacyclic NTT, normal order in, bit-reversed order out."""
    a = a.copy()
    n = a.size
    q = np.int64(q)
    t = n
    m = 1
    while m < n:
        t //= 2
        s = psi_rev[m : 2 * m][:, None]
        blocks = a.reshape(m, 2 * t)
        u = blocks[:, :t].copy()
        v = _numpy_mulmod(blocks[:, t:], s, q)
        blocks[:, :t] = (u + v) % q
        blocks[:, t:] = (u - v) % q
        m *= 2
    return a


def _numpy_ntt_inverse(
    a: np.ndarray, ipsi_rev: np.ndarray, n_inv: int, q: int
) -> np.ndarray:
    """Inverse transform, bit-reversed order in, normal order out."""
    a = a.copy()
    n = a.size
    q = np.int64(q)
    t = 1
    m = n
    while m > 1:
        h = m // 2
        s = ipsi_rev[h : 2 * h][:, None]
        blocks = a.reshape(h, 2 * t)
        u = blocks[:, :t].copy()
        v = blocks[:, t:].copy()
        blocks[:, :t] = (u + v) % q
        blocks[:, t:] = _numpy_mulmod((u - v) % q, s, q)
        t *= 2
        m = h
    return _numpy_mulmod(a, np.int64(n_inv), q)


def _numpy_pointwise(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    return _numpy_mulmod(a, b, np.int64(q))


def _build_numba():
    import numba as nb

    njit_kwargs = {"nogil": True, "cache": True}

    @nb.njit(**njit_kwargs)
    def ntt_forward(a, psi_rev, q):
        a = a.copy()
        n = a.size
        t = n
        m = 1
        while m < n:
            t //= 2
            for i in range(m):
                j1 = 2 * i * t
                s = psi_rev[m + i]
                for j in range(j1, j1 + t):
                    u = a[j]
                    x = a[j + t]
                    v = ((((x >> 21) * s) % q << 21) + (x & 0x1FFFFF) * s) % q
                    a[j] = (u + v) % q
                    a[j + t] = (u - v) % q
            m *= 2
        return a

    @nb.njit(**njit_kwargs)
    def ntt_inverse(a, ipsi_rev, n_inv, q):
        a = a.copy()
        n = a.size
        t = 1
        m = n
        while m > 1:
            h = m // 2
            j1 = 0
            for i in range(h):
                s = ipsi_rev[h + i]
                for j in range(j1, j1 + t):
                    u = a[j]
                    v = a[j + t]
                    a[j] = (u + v) % q
                    x = (u - v) % q
                    a[j + t] = ((((x >> 21) * s) % q << 21) + (x & 0x1FFFFF) * s) % q
                j1 += 2 * t
            t *= 2
            m = h
        for j in range(n):
            x = a[j]
            a[j] = ((((x >> 21) * n_inv) % q << 21) + (x & 0x1FFFFF) * n_inv) % q
        return a

    @nb.njit(**njit_kwargs)
    def pointwise(a, b, q):
        out = np.empty_like(a)
        for j in range(a.size):
            x = a[j]
            y = b[j]
            out[j] = ((((x >> 21) * y) % q << 21) + (x & 0x1FFFFF) * y) % q
        return out

    return ntt_forward, ntt_inverse, pointwise


NUMPY_IMPL = (_numpy_ntt_forward, _numpy_ntt_inverse, _numpy_pointwise)

_requested = os.environ.get(_ENV_FLAG, "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(f"{_ENV_FLAG} must be 'numba' or 'numpy', got {_requested!r}")

NUMBA_IMPL = None
if _requested != "numpy":
    try:
        NUMBA_IMPL = _build_numba()
    except ImportError:
        if _requested == "numba":
            raise
        NUMBA_IMPL = None

if NUMBA_IMPL is not None:
    BACKEND = "numba"
    ntt_forward, ntt_inverse, pointwise = NUMBA_IMPL
else:
    BACKEND = "numpy"
    ntt_forward, ntt_inverse, pointwise = NUMPY_IMPL

mulmod = _numpy_mulmod


def active_backend() -> str:
    return BACKEND
