"""Benchmark the numba-compiled hot kernels against the pure-numpy fallback.

Run:
    python benchmarks/bench_kernels.py [--sizes small,medium,large] [--repeat 50]

Both implementations are imported directly (bypassing the env-flag dispatch)
so a single process can time them side by side. Results are checked for
agreement before timing.
"""

import argparse
import time

import numpy as np

from risee.accel import _numpy as kn_np

try:
    from risee.accel import _numba as kn_nb
except ImportError:
    kn_nb = None

SIZES = {
    "small": dict(K=2, N_R=2, N=16, cands=64),
    "medium": dict(K=4, N_R=4, N=64, cands=128),
    "large": dict(K=8, N_R=8, N=128, cands=256),
}


def make_problem(K, N_R, N, cands, seed=0):
    rng = np.random.default_rng(seed)
    A = (rng.standard_normal((K, N_R, N)) + 1j * rng.standard_normal((K, N_R, N))) / np.sqrt(2)
    gamma = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) / np.sqrt(2)
    C = (rng.standard_normal((K, N_R)) + 1j * rng.standard_normal((K, N_R))) / np.sqrt(2)
    G = (rng.standard_normal((cands, N)) + 1j * rng.standard_normal((cands, N))) / np.sqrt(2)
    p = rng.uniform(0.1, 1.0, K)
    F = A @ gamma
    return A, F, C, G, p, 1e-3


def timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_one(name, params, repeat):
    A, F, C, G, p, sigma2 = make_problem(**params)
    cases = [
        ("sr_mmse_from_F", lambda m: m.sr_mmse_from_F(F, p, sigma2)),
        ("score_candidates", lambda m: m.score_candidates(A, G, p, sigma2)),
        ("pair_gains", lambda m: m.pair_gains(F, C)),
    ]
    print(f"\n[{name}] K={params['K']} N_R={params['N_R']} N={params['N']} "
          f"candidates={params['cands']}")
    for label, call in cases:
        ref = call(kn_np)
        t_np = timeit(lambda: call(kn_np), repeat)
        line = f"  {label:18s} numpy {t_np * 1e6:10.1f} us"
        if kn_nb is not None:
            got = call(kn_nb)
            np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-12)
            call(kn_nb)  # warm the JIT before timing
            t_nb = timeit(lambda: call(kn_nb), repeat)
            line += f"   numba {t_nb * 1e6:10.1f} us   speedup {t_np / t_nb:6.2f}x"
        print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="small,medium,large")
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    if kn_nb is None:
        print("numba not importable; timing the numpy path only")
    for name in args.sizes.split(","):
        bench_one(name.strip(), SIZES[name.strip()], args.repeat)


if __name__ == "__main__":
    main()
