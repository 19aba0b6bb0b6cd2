"""Benchmark the reaction kernels: numba build vs pure-numpy fallback.

Times the fused RK2 reaction update (the hot pointwise loop of the time
integrator) on a few grid sizes, then an end-to-end trajectory run under each
backend via HIVRD_KERNELS subprocesses.

Usage: python benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from hivrd import _kernels

RATES = (0.001, 1000.0, 0.1, 0.5, 10.0)  # gamma, N, mu_T, mu_I, mu_V


def time_kernel(fn, args, repeat=200):
    fn(*args)  # warm-up (includes JIT compilation for the numba build)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_pointwise():
    print("reaction RK2 substep, seconds per call")
    print(f"{'grid':>10} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    rng = np.random.Generator(np.random.PCG64(0))
    for n in (64, 128, 256):
        T = rng.random((n, n)) * 15.0
        I = rng.random((n, n)) * 1.0
        V = rng.random((n, n)) * 50.0
        alpha = rng.random((n, n)) * 2.0
        args = (T, I, V, alpha, *RATES, 1e-3)
        t_np = time_kernel(_kernels.reaction_rk2_numpy, args)
        try:
            fns = _kernels._numba_kernels()
        except ImportError:
            print(f"{n:>10} {t_np:12.3e}        numba unavailable")
            continue
        t_nb = time_kernel(fns[0], args)
        print(f"{n:>10} {t_np:12.3e} {t_nb:12.3e} {t_np / t_nb:8.1f}x")


EVOLVE_SNIPPET = """
import time
import numpy as np
from hivrd import EvolveConfig, GridSpec, ScalarField, evolve, inoculum_state
from hivrd import _kernels
from hivrd.model import params_from_r0

spec = GridSpec(64, 1.0)
p = params_from_r0(ScalarField.constant(spec, 1.5), 0.001, 1000.0, 0.1, 0.5, 10.0, 1.0)
s0 = inoculum_state(p, (32, 32), 1.0)
cfg = EvolveConfig(dt=1e-3, t_end=5.0, record_every=1000)
evolve(s0, p, cfg)  # warm-up
t0 = time.perf_counter()
evolve(s0, p, cfg)
print(f"{_kernels.BACKEND}: {time.perf_counter() - t0:.2f} s for 5000 steps on 64x64")
"""


def bench_evolve():
    print("\nfull trajectory (reaction + spectral diffusion per step)")
    for backend in ("numpy", "numba"):
        env = dict(os.environ, HIVRD_KERNELS=backend)
        out = subprocess.run(
            [sys.executable, "-c", EVOLVE_SNIPPET], env=env, capture_output=True, text=True
        )
        sys.stdout.write(out.stdout or out.stderr)


if __name__ == "__main__":
    bench_pointwise()
    bench_evolve()
