#!/usr/bin/env python3
"""Time the compiled kernels against the numpy reference backend.

The two hot paths are the bilinear transfer-grid kernel (dominates contour
scans and brute-force singularity searches) and the radix-2 butterflies
(dominate pulse propagation).  Outputs are also cross-checked bitwise.

Run:
    python benchmarks/bench_backends.py [--grid 1500] [--fft 4096] [--repeats 5]
"""

import argparse
import time

import numpy as np

from weaklight.backends import reference
from weaklight.fourier import _tables

try:
    from weaklight.backends import _core
except ImportError:
    _core = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_bilinear(impl, size, repeats, rng):
    nw = nb = size
    args = [rng.normal(size=nw) for _ in range(4)] \
        + [rng.normal(size=nb) for _ in range(4)]
    out_re = np.empty((nb, nw))
    out_im = np.empty((nb, nw))
    t = best_of(lambda: impl.bilinear_grid(*args, out_re, out_im), repeats)
    return t, (out_re.copy(), out_im.copy())


def bench_fft(impl, n, repeats, rng):
    perm, tw_re, tw_im = _tables(n)
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    base_re = np.ascontiguousarray(z.real[perm])
    base_im = np.ascontiguousarray(z.imag[perm])
    loops = 200

    def run():
        for _ in range(loops):
            re = base_re.copy()
            im = base_im.copy()
            impl.fft_butterflies(re, im, tw_re, tw_im)

    t = best_of(run, repeats) / loops
    re = base_re.copy()
    im = base_im.copy()
    impl.fft_butterflies(re, im, tw_re, tw_im)
    return t, (re, im)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=1500,
                    help="transfer grid edge length (default 1500)")
    ap.add_argument("--fft", type=int, default=4096,
                    help="transform size, power of two (default 4096)")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if _core is None:
        print("compiled backend not built; nothing to compare "
              "(reinstall with a working C compiler)")
        return

    rng = np.random.default_rng(2026)
    rows = []

    t_ref, out_ref = bench_bilinear(reference, args.grid, args.repeats, rng)
    rng = np.random.default_rng(2026)
    t_core, out_core = bench_bilinear(_core, args.grid, args.repeats, rng)
    match = np.array_equal(out_ref[0], out_core[0]) \
        and np.array_equal(out_ref[1], out_core[1])
    rows.append((f"bilinear_grid {args.grid}x{args.grid}",
                 t_ref, t_core, match))

    rng = np.random.default_rng(2027)
    t_ref, out_ref = bench_fft(reference, args.fft, args.repeats, rng)
    rng = np.random.default_rng(2027)
    t_core, out_core = bench_fft(_core, args.fft, args.repeats, rng)
    match = np.array_equal(out_ref[0], out_core[0]) \
        and np.array_equal(out_ref[1], out_core[1])
    rows.append((f"fft_butterflies n={args.fft}", t_ref, t_core, match))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'reference':>12}  {'compiled':>12}  "
          f"{'speedup':>8}  bitwise")
    for name, t_ref, t_core, match in rows:
        print(f"{name:<{width}}  {t_ref * 1e3:>10.3f}ms  {t_core * 1e3:>10.3f}ms  "
              f"{t_ref / t_core:>7.2f}x  {'equal' if match else 'DIFFER'}")


if __name__ == "__main__":
    main()
