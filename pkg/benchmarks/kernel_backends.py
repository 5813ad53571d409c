#!/usr/bin/env python3
"""Side-by-side timing of the numba and numpy transform kernels.

The package selects its kernel backend at import time from the
SATAUTH_BACKEND environment variable; this script ignores that knob and
times both implementations directly on identical inputs, verifying that
they produce bit-identical results while measuring the gap.

Usage: python benchmarks/kernel_backends.py [--profile paper] [--reps 500]
"""

import argparse
import time

import numpy as np

from satauth import _kernels
from satauth.params import get_profile
from satauth.ring import get_ring


def time_fn(fn, reps):
    fn()
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps * 1e6


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--profile", default="paper")
    parser.add_argument("--reps", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    ring = get_ring(get_profile(args.profile))
    q = ring.params.q
    rng = np.random.default_rng(args.seed)
    x = ring.sample_uniform(rng)
    y = ring.sample_uniform(rng)

    impls = {"numpy": _kernels.NUMPY_IMPL}
    if _kernels.NUMBA_IMPL is not None:
        impls["numba"] = _kernels.NUMBA_IMPL
    else:
        print("numba unavailable; timing the numpy path only")

    # cross-check first: identical transforms and products
    results = {}
    for name, (fwd, inv, pw) in impls.items():
        fa = fwd(x.coeffs, ring._psi_rev, q)
        fb = fwd(y.coeffs, ring._psi_rev, q)
        results[name] = inv(pw(fa, fb, q), ring._ipsi_rev, ring._n_inv, q)
    reference = next(iter(results.values()))
    for name, out in results.items():
        assert np.array_equal(out, reference), f"{name} disagrees"
    assert np.array_equal(reference, ring.schoolbook_mul(x, y).coeffs)
    print(f"backends agree with each other and with the schoolbook oracle "
          f"(profile {args.profile}, n={ring.params.n})")

    print(f"{'kernel':<22s} {'mean_us':>10s}")
    rows = {}
    for name, (fwd, inv, pw) in impls.items():
        def full_mul(fwd=fwd, inv=inv, pw=pw):
            fa = fwd(x.coeffs, ring._psi_rev, q)
            fb = fwd(y.coeffs, ring._psi_rev, q)
            inv(pw(fa, fb, q), ring._ipsi_rev, ring._n_inv, q)

        rows[name] = {
            "forward": time_fn(lambda fwd=fwd: fwd(x.coeffs, ring._psi_rev, q), args.reps),
            "full-mul": time_fn(full_mul, args.reps),
        }
        for op, us in rows[name].items():
            print(f"{name + ':' + op:<22s} {us:>10.2f}")
    if len(rows) == 2:
        speedup = rows["numpy"]["full-mul"] / rows["numba"]["full-mul"]
        print(f"numba speedup over numpy on full multiply: {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
