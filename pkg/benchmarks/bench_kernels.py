#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Kernel micro-benchmarks run both implementations in-process; the
end-to-end frame decode runs in subprocesses with BMST_NUMBA=1/0 so each
path gets a clean import.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from bmst import kernels


def bench(label, fn, *args, repeat=5, number=3):
    fn(*args)  # warm up (JIT compile)
    t = min(timeit.repeat(lambda: fn(*args), repeat=repeat, number=number)) / number
    print(f"  {label:<34} {t * 1e3:9.3f} ms")
    return t


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = 10_000 if not args.quick else 2_000
    m = 8
    stack = rng.normal(0, 8, size=(m + 2, n))
    llr = rng.normal(0, 8, size=n)

    print(f"kernel benchmarks (n={n}, m={m})")
    pairs = [
        ("leave_one_out_boxplus", kernels.leave_one_out_boxplus_numpy, (stack,)),
        ("blockwise_loo_sum", kernels.blockwise_loo_sum_numpy, (llr, 2)),
        ("blockwise_loo_boxplus", kernels.blockwise_loo_boxplus_numpy, (llr, 8)),
    ]
    for name, np_fn, a in pairs:
        t_np = bench(f"{name} [numpy]", np_fn, *a)
        if kernels.NUMBA_ENABLED:
            nb_fn = getattr(kernels, name + "_numba")
            t_nb = bench(f"{name} [numba]", nb_fn,
                         np.ascontiguousarray(a[0]), *a[1:])
            print(f"  {'speedup':<34} {t_np / t_nb:8.1f}x")

    print("\nend-to-end frame decode (RC[2,1]^1000, m=2, d=6, L=50, 2.0 dB)")
    snippet = (
        "import time, numpy as np\n"
        "import bmst\n"
        "from bmst.channel import ebn0_to_sigma, transmit, channel_llr\n"
        "sys_ = bmst.make_system('RC[2,1]^1000', 2, 50, seed=1)\n"
        "rng = np.random.default_rng(0)\n"
        "msgs = rng.integers(0, 2, (50, sys_.k), dtype=np.uint8)\n"
        "c = bmst.encode_frame(sys_, msgs)\n"
        "sigma = ebn0_to_sigma(2.0, 0.5)\n"
        "llr = channel_llr(transmit(bmst.bpsk_map(c), sigma, rng), sigma)\n"
        "bmst.decode_frame_swd(sys_, llr, 6, 18)  # warm up / JIT\n"
        "t0 = time.perf_counter()\n"
        "bmst.decode_frame_swd(sys_, llr, 6, 18)\n"
        "print(f'{time.perf_counter() - t0:.3f}')\n"
    )
    for flag, label in [("1", "numba"), ("0", "numpy")]:
        env = dict(os.environ, BMST_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", snippet], env=env,
                             capture_output=True, text=True)
        if out.returncode != 0:
            print(out.stderr, file=sys.stderr)
            raise SystemExit(out.returncode)
        print(f"  decode_frame_swd [{label}]  {float(out.stdout) * 1e3:9.1f} ms")


if __name__ == "__main__":
    main()
