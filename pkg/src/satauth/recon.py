"""Error reconciliation: the signal function and the parity extractor.

``cha`` flags whether a centered residue lies in the middle interval
E = {-floor(q/4), ..., floor(q/4)}.  ``mod2`` lifts a residue to [0, q),
shifts it by (q-1)/2 when the signal bit is set, and keeps the parity.
Two residues whose difference is even and at most q/4 - 2 in magnitude
produce the same parity under the same signal; the evenness requirement
is essential (v=100, w=105 is a counterexample without it) and every
error term in the protocol carries a factor of two, so it always holds.
"""

from __future__ import annotations

import numpy as np

from . import instrument
from .ring import RingElement


def cha(v: int, q: int) -> int:
    """Signal bit of a centered residue: 1 iff |v| <= floor(q/4)."""
    return 1 if abs(v) <= q // 4 else 0


def mod2(v: int, w: int, q: int) -> int:
    """Parity of v lifted to [0, q) and shifted by w*(q-1)/2."""
    return ((v % q) + w * ((q - 1) // 2)) % q % 2


def cha_vec(centered: np.ndarray, q: int) -> np.ndarray:
    instrument.COUNTS.cha += 1
    return (np.abs(centered) <= q // 4).astype(np.uint8)


def mod2_vec(values: np.ndarray, signal: np.ndarray, q: int) -> np.ndarray:
    if len(values) != len(signal):
        raise ValueError("dimension mismatch")
    lifted = values % q
    return ((lifted + signal.astype(np.int64) * ((q - 1) // 2)) % q % 2).astype(np.uint8)


def signal_of(elem: RingElement) -> np.ndarray:
    """Coefficient-wise signal vector of a ring element (n bits)."""
    return cha_vec(elem.centered(), elem.ring.params.q)


def reconcile(elem: RingElement, signal: np.ndarray) -> np.ndarray:
    """Coefficient-wise parity extraction against a received signal."""
    n = elem.ring.params.n
    if len(signal) != n:
        raise ValueError("dimension mismatch")
    return mod2_vec(elem.coeffs, signal, elem.ring.params.q)
