"""Throughput comparison of the metric kernels: njit loops vs numpy batch.

Run from the repo root:

    python3 benchmarks/bench_metrics.py [--samples N] [--repeats K]

Both backends compute identical ac1/ac2/ene/xcr arrays; the deviation check
at the end guards against benchmarking two different answers.
"""

import argparse
import time

import numpy as np

from ldacs_sync import energy_template, generate_preamble, make_numerology
from ldacs_sync._kernels import _HAVE_NUMBA, metric_arrays_numpy

if _HAVE_NUMBA:
    from ldacs_sync._kernels import metric_arrays_numba


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    num = make_numerology()
    pre = generate_preamble(num, 1)
    template = energy_template(pre, num)

    rng = np.random.default_rng(1)
    r = (rng.normal(size=args.samples) + 1j * rng.normal(size=args.samples)) / np.sqrt(2)
    r[5000 : 5000 + pre.samples.size] += pre.samples  # something to correlate with
    L = num.l_quarter
    a = template.a

    t_np = best_of(lambda: metric_arrays_numpy(r, L, a), args.repeats)
    print(f"numpy : {t_np:8.3f} s   {args.samples / t_np / 1e6:6.2f} Msamp/s")

    if not _HAVE_NUMBA:
        print("numba : not installed, skipping")
        return 0

    metric_arrays_numba(r[:4096], L, a)  # compile outside the timed region
    t_nb = best_of(lambda: metric_arrays_numba(r, L, a), args.repeats)
    print(f"numba : {t_nb:8.3f} s   {args.samples / t_nb / 1e6:6.2f} Msamp/s")
    print(f"speedup: {t_np / t_nb:.2f}x")

    out_np = metric_arrays_numpy(r, L, a)
    out_nb = metric_arrays_numba(r, L, a)
    dev = max(
        float(np.max(np.abs(x - y)) / max(1.0, np.max(np.abs(x))))
        for x, y in zip(out_np, out_nb)
    )
    print(f"max relative deviation between backends: {dev:.3e}")
    if dev > 1e-9:
        print("backends disagree beyond tolerance")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
