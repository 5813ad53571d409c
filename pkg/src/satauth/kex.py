"""Randomised lattice key agreement between two static key pairs.

Both sides mix a public per-session ephemeral ``te`` into the product of
the peer's public key and their own secret, then add a fresh error term:

    k  = (pk_peer * sk_self + 2*te) * te + 2*re

The fresh ``re`` is what defeats signal-leakage key-reuse against the
static keys; it also means the two sides compute *approximately* equal
elements whose difference is even, so the signal/parity reconciliation
recovers one shared bit string when the noise stays under q/4 - 2.

``predicted_disagreement_rate`` computes the per-coefficient failure
probability analytically from the sampler variance (Gaussian model for
the accumulated convolution noise); ``measure_disagreement`` estimates it
by Monte Carlo.  Under the ``paper`` profile the two agree on a rate far
above zero -- that modulus cannot carry this much noise -- while the
``robust`` profile drives the rate below 2**-30.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import recon
from .hashing import h_tagged
from .params import RingParams
from .ring import Ring, RingElement


@dataclass(frozen=True)
class KeyPair:
    """Static pair pk = a*sk + 2*se with Gaussian sk, se."""

    pk: RingElement
    sk: RingElement
    se: RingElement


@dataclass(frozen=True)
class AgreementShare:
    """Initiator output: public ephemeral, signal, and the derived bits.

    ``raw`` keeps the initiator's noisy element for white-box tests; it is
    key material and never serialises.
    """

    ephemeral: RingElement
    signal: np.ndarray
    key: np.ndarray
    raw: RingElement


def _error_rng(sk: RingElement, a: RingElement) -> np.random.Generator:
    digest = h_tagged("keypair-noise", sk, a)
    return np.random.default_rng(np.random.SeedSequence(list(digest)))


def keygen(ring: Ring, a: RingElement, rng: np.random.Generator) -> KeyPair:
    """Fresh static key pair under the system public element ``a``.

    The masking error is drawn from a generator seeded by the secret key,
    so the public key is recomputable from (a, sk) alone; the user device
    relies on this to rebuild its public key after unlocking its vault.
    """
    sk = ring.sample_gaussian(rng)
    se = ring.sample_gaussian(_error_rng(sk, a))
    pk = ring.add(ring.mul(a, sk), ring.scale(se, 2))
    return KeyPair(pk=pk, sk=sk, se=se)


def public_key_for(ring: Ring, a: RingElement, sk: RingElement) -> RingElement:
    se = ring.sample_gaussian(_error_rng(sk, a))
    return ring.add(ring.mul(a, sk), ring.scale(se, 2))


def initiate(
    ring: Ring, pk_peer: RingElement, sk_self: RingElement, rng: np.random.Generator
) -> AgreementShare:
    te = ring.sample_gaussian(rng)
    re = ring.sample_gaussian(rng)
    k = ring.add(ring.mul(ring.add(ring.mul(pk_peer, sk_self), ring.scale(te, 2)), te),
                 ring.scale(re, 2))
    signal = recon.signal_of(k)
    return AgreementShare(ephemeral=te, signal=signal, key=recon.reconcile(k, signal), raw=k)


def respond(
    ring: Ring,
    pk_peer: RingElement,
    sk_self: RingElement,
    te: RingElement,
    signal: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Responder side: same formula with a fresh error, peer's signal."""
    re = ring.sample_gaussian(rng)
    k = ring.add(ring.mul(ring.add(ring.mul(pk_peer, sk_self), ring.scale(te, 2)), te),
                 ring.scale(re, 2))
    return recon.reconcile(k, signal)


def kdf(key_bits: np.ndarray) -> bytes:
    """Compress the n reconciled bits to a 256-bit secret."""
    return h_tagged("kdf", np.asarray(key_bits, dtype=np.uint8))


# -- noise budget -------------------------------------------------------


def difference_std(params: RingParams, sampler_variance: float | None = None) -> float:
    """Per-coefficient std of the two sides' difference.

    The difference is 2*(se_b*sk_a - se_a*sk_b)*te + 2*(re - re'); each
    coefficient of a product of independent elements is a length-n
    convolution, so variances multiply and pick up a factor n per product.
    """
    n = params.n
    v = params.beta**2 if sampler_variance is None else sampler_variance
    return math.sqrt(8 * n * n * v**3 + 8 * v)


def predicted_disagreement_rate(
    params: RingParams, sampler_variance: float | None = None, grid: int = 4096
) -> float:
    """Analytical per-coefficient disagreement probability.

    The initiator's value, lifted by its own signal, lands uniformly in
    [q/4, 3q/4]; the parity flips iff the Gaussian difference carries the
    lifted value across a wrap boundary an odd number of times.
    """
    q = params.q
    sigma = difference_std(params, sampler_variance)

    def ncdf(x: float) -> float:
        return 0.5 * math.erfc(-x / math.sqrt(2.0))

    lo, hi = q / 4.0, 3.0 * q / 4.0
    us = np.linspace(lo, hi, grid)
    total = 0.0
    for u in us:
        p = 0.0
        for m in (-5, -3, -1, 1, 3, 5):
            # difference in (u-(m+1)q, u-mq] puts the floor at m
            p += ncdf((u - m * q) / sigma) - ncdf((u - (m + 1) * q) / sigma)
        total += p
    return total / len(us)


def measure_disagreement(params: RingParams, exchanges: int, seed: int) -> np.ndarray:
    """Monte Carlo: per-exchange coefficient disagreement rates over honest runs.

    Rates are returned per exchange because coefficients inside one
    exchange share the same secrets and ephemeral, so they are positively
    correlated; a binomial interval over raw coefficients would be too
    narrow.
    """
    ring = Ring(params)
    root = np.random.SeedSequence(seed)
    rates = np.empty(exchanges, dtype=np.float64)
    for i, child in enumerate(root.spawn(exchanges)):
        rng = np.random.default_rng(child)
        a = ring.sample_gaussian(rng)
        alice = keygen(ring, a, rng)
        bob = keygen(ring, a, rng)
        share = initiate(ring, bob.pk, alice.sk, rng)
        other = respond(ring, alice.pk, bob.sk, share.ephemeral, share.signal, rng)
        rates[i] = np.count_nonzero(share.key != other) / params.n
    return rates


def rate_interval(rates: np.ndarray, z: float = 1.959964) -> tuple[float, float, float]:
    """(mean, lo, hi): cluster-aware 95% interval over per-exchange rates."""
    mean = float(rates.mean())
    half = z * float(rates.std(ddof=1)) / math.sqrt(len(rates)) if len(rates) > 1 else 1.0
    return mean, max(0.0, mean - half), min(1.0, mean + half)
