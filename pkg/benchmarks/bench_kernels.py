#!/usr/bin/env python
"""Compiled vs pure-Python RK4 Lindblad kernel.

Times ``advance`` on the full 16-level model (preset Ia) and on the
effective two-level model, and checks that both backends agree.

    python benchmarks/bench_kernels.py --steps 200
"""
import argparse
import time
from dataclasses import replace

import numpy as np

from rabisim.kernels import LindbladRK4, available_backends
from rabisim.models import EffectiveParams, build_effective, build_full
from rabisim.presets import PRESETS


def time_advance(gen, backend, steps, repeats):
    kern = LindbladRK4.from_generator(gen, backend)
    rho0 = gen.basis_state("e", 0).data
    dt = 1.0 / (40.0 * gen.max_frequency) if not gen.is_static else 1e-3
    kern.advance(rho0, 0.0, dt, 2)  # warm up
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = kern.advance(rho0, 0.0, dt, steps)
        best = min(best, time.perf_counter() - t0)
    return best / steps, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--n-max-full", type=int, default=8)
    ap.add_argument("--n-max-eff", type=int, default=40)
    args = ap.parse_args()

    cases = {
        f"full Ia, n_max={args.n_max_full}":
            build_full(replace(PRESETS["Ia"].phys, kappa=0.1), args.n_max_full),
        f"effective, n_max={args.n_max_eff}":
            build_effective(EffectiveParams(0.0, 1.0, 2.0, -0.18, 0.1), args.n_max_eff),
    }
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    for label, gen in cases.items():
        res = {b: time_advance(gen, b, args.steps, args.repeats) for b in backends}
        line = f"{label:24s} dim={gen.layout.total_dim:4d}"
        for b, (per, _) in res.items():
            line += f"  {b}: {per * 1e3:8.3f} ms/step"
        if len(res) == 2:
            dev = np.max(np.abs(res["cython"][1] - res["python"][1]))
            line += f"  speedup x{res['python'][0] / res['cython'][0]:.1f}  max|diff|={dev:.1e}"
        print(line)


if __name__ == "__main__":
    main()
