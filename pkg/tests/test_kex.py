"""Key agreement: correctness identities, randomisation, and noise budget."""

import numpy as np

from satauth import kex, recon
from satauth.params import PROFILES
from satauth.ring import get_ring


class _ZeroRng:
    """random() pinned to 0.5 makes the table sampler emit zero coefficients."""

    def random(self, n):
        return np.full(n, 0.5)


def test_keygen_construction_invariant(robust_ring, rng):
    a = robust_ring.sample_gaussian(rng)
    pair = kex.keygen(robust_ring, a, rng)
    residue = robust_ring.sub(pair.pk, robust_ring.mul(a, pair.sk)).centered()
    assert (residue % 2 == 0).all()
    assert np.abs(residue).max() <= 2 * 32


def test_keygen_deterministic(paper_ring, rng):
    a = paper_ring.sample_gaussian(rng)
    p1 = kex.keygen(paper_ring, a, np.random.default_rng(3))
    p2 = kex.keygen(paper_ring, a, np.random.default_rng(3))
    assert p1.pk == p2.pk and p1.sk == p2.sk and p1.se == p2.se


def test_keygen_recompute_oracle(small_ring, rng):
    a = small_ring.sample_gaussian(rng)
    for _ in range(1000):
        pair = kex.keygen(small_ring, a, rng)
        rebuilt = small_ring.add(
            small_ring.schoolbook_mul(a, pair.sk), small_ring.scale(pair.se, 2)
        )
        assert rebuilt == pair.pk
        assert kex.public_key_for(small_ring, a, pair.sk) == pair.pk


def test_initiate_zero_ephemeral(paper_ring, rng):
    a = paper_ring.sample_gaussian(rng)
    alice = kex.keygen(paper_ring, a, rng)
    bob = kex.keygen(paper_ring, a, rng)
    share = kex.initiate(paper_ring, bob.pk, alice.sk, _ZeroRng())
    assert share.raw == paper_ring.zero()
    assert (share.signal == 1).all()  # cha(0) = 1
    assert (share.key == 0).all()  # mod2(0, 1) = 0 because (q-1)/2 is even
    other = kex.respond(
        paper_ring, alice.pk, bob.sk, share.ephemeral, share.signal, _ZeroRng()
    )
    assert np.array_equal(share.key, other)


def test_initiate_signal_matches_raw(paper_ring, rng):
    a = paper_ring.sample_gaussian(rng)
    alice = kex.keygen(paper_ring, a, rng)
    bob = kex.keygen(paper_ring, a, rng)
    share = kex.initiate(paper_ring, bob.pk, alice.sk, rng)
    assert np.array_equal(share.signal, recon.signal_of(share.raw))
    assert np.array_equal(share.key, recon.reconcile(share.raw, share.signal))


def test_initiate_deterministic(paper_ring, rng):
    a = paper_ring.sample_gaussian(rng)
    alice = kex.keygen(paper_ring, a, rng)
    bob = kex.keygen(paper_ring, a, rng)
    s1 = kex.initiate(paper_ring, bob.pk, alice.sk, np.random.default_rng(9))
    s2 = kex.initiate(paper_ring, bob.pk, alice.sk, np.random.default_rng(9))
    assert s1.ephemeral == s2.ephemeral and np.array_equal(s1.key, s2.key)


def test_robust_exchanges_agree(robust_ring, rng):
    a = robust_ring.sample_gaussian(rng)
    alice = kex.keygen(robust_ring, a, rng)
    bob = kex.keygen(robust_ring, a, rng)
    for _ in range(50):
        share = kex.initiate(robust_ring, bob.pk, alice.sk, rng)
        other = kex.respond(
            robust_ring, alice.pk, bob.sk, share.ephemeral, share.signal, rng
        )
        assert np.array_equal(share.key, other)


def test_difference_identity_small_ring(small_ring, rng):
    """centered(k1 - k2) == 2*((se_b*sk_a - se_a*sk_b)*te + re1 - re2)."""
    ring = small_ring
    a = ring.sample_gaussian(rng)
    sk_a, se_a = ring.sample_gaussian(rng), ring.sample_gaussian(rng)
    sk_b, se_b = ring.sample_gaussian(rng), ring.sample_gaussian(rng)
    pk_a = ring.add(ring.schoolbook_mul(a, sk_a), ring.scale(se_a, 2))
    pk_b = ring.add(ring.schoolbook_mul(a, sk_b), ring.scale(se_b, 2))
    te, re1, re2 = (ring.sample_gaussian(rng) for _ in range(3))
    k1 = ring.add(
        ring.schoolbook_mul(ring.add(ring.schoolbook_mul(pk_b, sk_a), ring.scale(te, 2)), te),
        ring.scale(re1, 2),
    )
    k2 = ring.add(
        ring.schoolbook_mul(ring.add(ring.schoolbook_mul(pk_a, sk_b), ring.scale(te, 2)), te),
        ring.scale(re2, 2),
    )
    cross = ring.sub(
        ring.schoolbook_mul(se_b, sk_a), ring.schoolbook_mul(se_a, sk_b)
    )
    expected = ring.add(ring.schoolbook_mul(cross, te), ring.sub(re1, re2))
    assert ring.sub(k1, k2) == ring.scale(expected, 2)
    assert (ring.sub(k1, k2).centered() % 2 == 0).all()


def test_signal_reuse_randomisation(paper_ring, rng):
    a = paper_ring.sample_gaussian(rng)
    alice = kex.keygen(paper_ring, a, rng)
    bob = kex.keygen(paper_ring, a, rng)
    signals = set()
    for i in range(1000):
        share = kex.initiate(paper_ring, bob.pk, alice.sk, np.random.default_rng(i))
        signals.add(share.signal.tobytes())
    assert len(signals) == 1000


def test_kdf_properties(rng):
    seen = set()
    for _ in range(2000):
        bits = rng.integers(0, 2, size=1024).astype(np.uint8)
        out = kex.kdf(bits)
        assert len(out) == 32
        assert kex.kdf(bits) == out
        seen.add(out)
    assert len(seen) == 2000


# -- noise budget ----------------------------------------------------------


def test_difference_std_paper_magnitude():
    params = PROFILES["paper"]
    sigma = kex.difference_std(params)
    assert 5.0e4 < sigma < 5.2e4
    assert sigma > params.q / 4 - 2  # the paper modulus cannot absorb it


def test_robust_profile_margin():
    params = PROFILES["robust"]
    sigma = kex.difference_std(params)
    # threshold sits at millions of sigmas: failure probability < 2^-30
    assert (params.q / 4 - 2) / sigma > 1e6
    assert kex.predicted_disagreement_rate(params) < 2**-30


def test_measured_rate_consistent_with_prediction():
    params = PROFILES["paper"]
    ring = get_ring(params)
    rates = kex.measure_disagreement(params, exchanges=12, seed=5)
    mean, lo, hi = kex.rate_interval(rates)
    predicted = kex.predicted_disagreement_rate(params, ring.sampler_variance)
    assert lo <= predicted <= hi
    assert mean > 0.1  # materially nonzero under the paper modulus


def test_robust_measure_no_disagreements():
    rates = kex.measure_disagreement(PROFILES["robust"], exchanges=5, seed=6)
    assert (rates == 0).all()


def test_robust_noise_stays_under_threshold():
    """|k1 - k2| <= q/4 - 2 per coefficient over 10^6 sampled coefficients."""
    ring = get_ring(PROFILES["robust"])
    q = ring.params.q
    rng = np.random.default_rng(66)
    worst = 0
    for _ in range(1000):  # 1000 exchanges x 1024 coefficients
        a = ring.sample_gaussian(rng)
        alice = kex.keygen(ring, a, rng)
        bob = kex.keygen(ring, a, rng)
        te, re1, re2 = (ring.sample_gaussian(rng) for _ in range(3))
        k1 = ring.add(ring.mul(ring.add(ring.mul(bob.pk, alice.sk), ring.scale(te, 2)), te),
                      ring.scale(re1, 2))
        k2 = ring.add(ring.mul(ring.add(ring.mul(alice.pk, bob.sk), ring.scale(te, 2)), te),
                      ring.scale(re2, 2))
        delta = ring.sub(k1, k2).centered()
        worst = max(worst, int(np.abs(delta).max()))
    assert worst <= q // 4 - 2
    assert worst < 10**7  # the empirical noise is tiny next to q/4 ~ 5.5e11
