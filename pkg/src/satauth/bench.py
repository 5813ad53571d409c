"""Primitive timings on this machine, including both kernel backends.

Rows mirror the cost categories the protocol is built from: hashing,
Gaussian sampling, ring multiply/add, the signal function, and the
symmetric channel wrap.  Numbers are hardware-specific by nature; nothing
here is asserted against reference timings.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hashing import h_items
from .params import get_profile
from .recon import cha_vec
from .ring import get_ring
from .simnet import HashStreamWrap


@dataclass
class BenchRow:
    name: str
    reps: int
    mean_us: float

    def line(self) -> str:
        return f"{self.name:<26s} reps={self.reps:<6d} mean_us={self.mean_us:10.3f}"


def _time(fn, reps: int) -> float:
    fn()  # warm up caches and jit
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps * 1e6


def run_benchmarks(profile: str = "paper", seed: int = 0, reps: int = 200) -> list[BenchRow]:
    ring = get_ring(get_profile(profile))
    rng = np.random.default_rng(seed)
    x = ring.sample_uniform(rng)
    y = ring.sample_uniform(rng)
    data = x.pack_bytes()
    wrap = HashStreamWrap()
    key = h_items("bench-key")
    nonce = (7).to_bytes(8, "big")
    blob = wrap.wrap(key, nonce, data)
    q = ring.params.q
    centered = x.centered()

    rows = [
        BenchRow("hash-256", reps, _time(lambda: h_items(x, y), reps)),
        BenchRow("sample-gaussian", reps, _time(lambda: ring.sample_gaussian(rng), reps)),
        BenchRow("ring-add", reps, _time(lambda: ring.add(x, y), reps)),
        BenchRow("cha-signal", reps, _time(lambda: cha_vec(centered, q), reps)),
        BenchRow("sym-wrap", reps, _time(lambda: wrap.wrap(key, nonce, data), reps)),
        BenchRow("sym-unwrap", reps, _time(lambda: wrap.unwrap(key, blob), reps)),
    ]

    # ring multiply under each available backend
    impls = {"numpy": _kernels.NUMPY_IMPL}
    if _kernels.NUMBA_IMPL is not None:
        impls["numba"] = _kernels.NUMBA_IMPL

    for name, (fwd, inv, pw) in impls.items():
        def mul_once(fwd=fwd, inv=inv, pw=pw):
            fa = fwd(x.coeffs, ring._psi_rev, q)
            fb = fwd(y.coeffs, ring._psi_rev, q)
            inv(pw(fa, fb, q), ring._ipsi_rev, ring._n_inv, q)

        rows.append(BenchRow(f"ring-mul[{name}]", reps, _time(mul_once, reps)))
    rows.append(
        BenchRow("ring-mul[schoolbook]", max(5, reps // 20),
                 _time(lambda: ring.schoolbook_mul(x, y), max(5, reps // 20)))
    )
    return rows
