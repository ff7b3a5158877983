#!/usr/bin/env python3
"""Compare the compiled kernel core against the pure-numpy fallback.

Runs the three hot kernels (sensor sampling, non-local means, kernel merge)
on representative workloads, reports wall times and speedups, and verifies
that the backends agree: bit-exact for sampling and merging, to float noise
for NLM.

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from qisim.backend import available_backends


def _time(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="smaller workloads, single repeat")
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not available; nothing to compare")
        return 1
    ref = backends["python"]
    fast = backends["compiled"]
    repeats = 1 if args.quick else 3
    scale = 0.25 if args.quick else 1.0

    rng = np.random.default_rng(0)
    rows = []

    # sensor sampling: full frame at a photon-starved gain, with read noise
    side = int(1024 * scale) or 256
    scene = rng.uniform(0.0, 1.0, size=(side, side))
    sim_args = (0, side, 4.0, 5.1e-7, 0.25, 3, 1, 123456789, 0)
    t_ref, out_ref = _time(ref.simulate_rows, scene, *sim_args, repeats=repeats)
    t_fast, out_fast = _time(fast.simulate_rows, scene, *sim_args, repeats=repeats)
    exact = np.array_equal(out_ref, out_fast)
    rows.append(("simulate_rows", f"{side}x{side}, 3-bit", t_ref, t_fast,
                 "bit-exact" if exact else "MISMATCH"))

    # non-local means on a mid-size frame
    side = int(256 * scale) or 64
    img = rng.uniform(0.0, 1.0, size=(side, side))
    t_ref, out_ref = _time(ref.nlm, img, 1, 5, 0.3, repeats=repeats)
    t_fast, out_fast = _time(fast.nlm, img, 1, 5, 0.3, repeats=repeats)
    dev = float(np.max(np.abs(out_ref - out_fast)))
    rows.append(("nlm", f"{side}x{side}, r=1/5", t_ref, t_fast,
                 f"max dev {dev:.1e}"))

    # kernel merge over a burst
    side = int(128 * scale) or 32
    frames = rng.uniform(0.0, 1.0, size=(8, side, side))
    weights = rng.uniform(0.0, 1.0, size=(side, side, 8, 5, 5))
    weights /= weights.reshape(side, side, -1).sum(axis=2)[:, :, None, None, None]
    t_ref, out_ref = _time(ref.kernel_merge, frames, weights, repeats=repeats)
    t_fast, out_fast = _time(fast.kernel_merge, frames, weights, repeats=repeats)
    exact = np.array_equal(out_ref, out_fast)
    rows.append(("kernel_merge", f"{side}x{side}, T=8, K=5", t_ref, t_fast,
                 "bit-exact" if exact else "MISMATCH"))

    header = f"{'kernel':<14} {'workload':<20} {'python':>10} {'compiled':>10} {'speedup':>8}  agreement"
    print(header)
    print("-" * len(header))
    for name, workload, t_ref, t_fast, agree in rows:
        print(f"{name:<14} {workload:<20} {t_ref * 1e3:>8.1f}ms {t_fast * 1e3:>8.1f}ms "
              f"{t_ref / t_fast:>7.1f}x  {agree}")
    if any("MISMATCH" in r[4] for r in rows):
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
