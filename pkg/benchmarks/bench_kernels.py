"""Timing comparison of the numba kernels against the numpy fallback.

Run twice to compare backends:

    python benchmarks/bench_kernels.py
    CLUSTERSIM_NO_NUMBA=1 python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from clustersim._kernels import (
    USING_NUMBA,
    bessel_j_row,
    ou_accumulate,
    stabilize_loop,
    witness_samples,
)


def bench(label, fn, *args, repeat=5):
    fn(*args)  # warm-up (includes JIT compilation when numba is active)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    print(f"{label:24s} {min(times) * 1e3:10.3f} ms")


def main():
    rng = np.random.default_rng(0)
    print(f"backend: {'numba' if USING_NUMBA else 'numpy fallback'}")

    bench("bessel_j_row x 20k", lambda: [bessel_j_row(1.43, 8) for _ in range(20_000)])

    normals = rng.standard_normal(1_000_000)
    bench("ou_accumulate 1e6", ou_accumulate, normals, 0.999, 0.01)

    offsets = ou_accumulate(normals[:100_000], 0.9999, 0.05)
    noise = rng.normal(0.0, 0.5, 100_000 // 15 + 1)
    bench("stabilize_loop 1e5", stabilize_loop, offsets, 15, noise, 0.1)

    counts = rng.poisson(30.0, size=(200_000, 3, 16)).astype(np.float64)
    signs = np.where(rng.random((6, 16)) < 0.5, -1.0, 1.0)
    term_basis = np.array([0, 0, 1, 1, 2, 2], dtype=np.int64)
    bench("witness_samples 2e5", witness_samples, counts, signs, term_basis)


if __name__ == "__main__":
    main()
