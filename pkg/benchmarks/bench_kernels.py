#!/usr/bin/env python3
"""Benchmark the numba-jitted kernels against their pure-numpy fallbacks.

Usage:
  python3 benchmarks/bench_kernels.py [--side 512] [--iterations 20]

Verifies both paths agree byte-for-byte before timing. The first jitted call
compiles (cached afterwards); compilation is excluded by a warmup call.
"""

import argparse
import math
import time

import numpy as np

from furrowquant import kernels as K

HSV_DEFAULTS = (35.0, 75.0, 140.0, 10.0, 35.0, 60.0, 2, 1, 0)


def timeit(fn, iterations):
    fn()  # warmup / jit compile
    start = time.perf_counter()
    for _ in range(iterations):
        fn()
    return (time.perf_counter() - start) / iterations * 1000.0


def bench_case(name, np_fn, nb_fn, iterations):
    out_np, out_nb = np_fn(), nb_fn()
    agree = np.array_equal(np.asarray(out_np), np.asarray(out_nb))
    ms_np = timeit(np_fn, iterations)
    ms_nb = timeit(nb_fn, iterations)
    speedup = ms_np / ms_nb if ms_nb > 0 else float("inf")
    flag = "ok" if agree else "MISMATCH"
    print(f"{name:<22} numpy {ms_np:9.3f} ms   numba {ms_nb:9.3f} ms   "
          f"speedup {speedup:6.2f}x   outputs {flag}")
    return agree


def stroke_case(impl, side):
    def run():
        mask = np.full((side, side), 1, dtype=np.uint8)
        image = np.zeros((side, side, 3), dtype=np.uint8)
        total = 0
        for i in range(200):
            angle = (i * 0.813) % math.pi
            total += impl(
                mask, image,
                float((i * 37) % side), float((i * 53) % side),
                math.cos(angle), math.sin(angle), 40.0, 2.0,
                0, 2, 218, 190, 112, True,
            )
        return np.int64(total)

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--side", type=int, default=512, help="square frame side in px")
    parser.add_argument("--iterations", type=int, default=20)
    args = parser.parse_args()

    if not K.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    side = args.side
    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, size=(side * side, 3), dtype=np.uint8)
    labels = rng.integers(0, 3, size=(side, side), dtype=np.uint8)
    gt = rng.integers(0, 3, size=(side, side), dtype=np.uint8)
    pred = rng.integers(0, 3, size=(side, side), dtype=np.uint8)

    print(f"frame {side}x{side}, {args.iterations} iterations per measurement")
    ok = True
    ok &= bench_case(
        "hsv_classify",
        lambda: K.hsv_classify_np(rgb, *HSV_DEFAULTS),
        lambda: K.hsv_classify_nb(rgb, *HSV_DEFAULTS),
        args.iterations,
    )
    ok &= bench_case(
        "label_counts",
        lambda: K.label_counts_np(labels, 3),
        lambda: K.label_counts_nb(labels, 3),
        args.iterations,
    )
    ok &= bench_case(
        "confusion_tally",
        lambda: K.confusion_tally_np(gt, pred, 3),
        lambda: K.confusion_tally_nb(gt, pred, 3),
        args.iterations,
    )
    ok &= bench_case(
        "paint_stroke x200",
        stroke_case(K.paint_stroke_np, side),
        stroke_case(K.paint_stroke_nb, side),
        args.iterations,
    )
    if not ok:
        raise SystemExit("backend outputs disagree")


if __name__ == "__main__":
    main()
