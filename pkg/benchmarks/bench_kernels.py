"""Benchmark the numba kernels against the pure-numpy fallback.

Run: python benchmarks/bench_kernels.py [--repeats N]

Both backends are imported from one process (the jit functions exist even
when the env flag selects numpy), so the comparison uses identical inputs.
"""

import argparse
import time

import numpy as np

from entryway import kernels


def timeit(fn, *args, repeats=30):
    fn(*args)  # warm-up / JIT compile
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def row(name, numpy_s, jit_s):
    speedup = numpy_s / jit_s if jit_s > 0 else float("inf")
    print(f"{name:<28} numpy {numpy_s*1e3:9.3f} ms   numba {jit_s*1e3:9.3f} ms   x{speedup:5.1f}")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()

    print(f"active backend: {kernels.KERNEL_BACKEND}")
    if not kernels.HAS_NUMBA:
        print("numba unavailable or disabled; the 'numba' column below is the "
              "plain-python loop fallback, expect it to lose badly")
    r = np.random.default_rng(0)

    img = r.integers(0, 256, size=(128, 128)).astype(np.uint8)
    row(
        "lbp_codes 128x128",
        timeit(kernels.lbp_codes_numpy, img, repeats=args.repeats),
        timeit(kernels._lbp_codes_jit, img, repeats=args.repeats),
    )

    codes = kernels.lbp_codes_numpy(img)
    row(
        "cell_histograms 8x8",
        timeit(kernels.cell_histograms_numpy, codes, 8, 8, repeats=args.repeats),
        timeit(kernels._cell_histograms_jit, codes, 8, 8, repeats=args.repeats),
    )

    feats = r.random((600, 16384))
    q = feats[0].copy()
    row(
        "chi_square_many 600x16384",
        timeit(kernels.chi_square_many_numpy, feats, q, repeats=args.repeats),
        timeit(kernels._chi_square_many_jit, feats, q, repeats=args.repeats),
    )

    big = r.integers(0, 256, size=(160, 160)).astype(np.uint8)
    row(
        "resize_bilinear 160->128",
        timeit(kernels.resize_bilinear_numpy, big, 128, 128, repeats=args.repeats),
        timeit(kernels._resize_bilinear_jit, big, 128, 128, repeats=args.repeats),
    )

    # end-to-end: one frame described + matched against a 600-entry model
    def pipeline(lbp, hist, chi):
        roi = kernels.resize_bilinear_numpy(big, 128, 128)
        feat = hist(lbp(roi), 8, 8)
        return chi(feats[:, : feat.size], feat)

    row(
        "describe+match pipeline",
        timeit(pipeline, kernels.lbp_codes_numpy, kernels.cell_histograms_numpy,
               kernels.chi_square_many_numpy, repeats=args.repeats),
        timeit(pipeline, kernels._lbp_codes_jit, kernels._cell_histograms_jit,
               kernels._chi_square_many_jit, repeats=args.repeats),
    )


if __name__ == "__main__":
    main()
