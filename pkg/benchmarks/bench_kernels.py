"""Timing comparison of the compiled kernels against the numpy fallback.

Per-kernel timings call both registry entries directly, so they run in
one process regardless of which backend is active.  The end-to-end
trajectory timing uses whatever backend this process imported; pass
``--solver-fallback`` to also time the same run in a subprocess with
``FLUCTLAB_DISABLE_NUMBA=1``.

Usage::

    python3 benchmarks/bench_kernels.py [--n N] [--batch B] [--repeat R]
                                        [--solver-fallback]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from fluctlab import kernels

_SOLVER_SNIPPET = """
import time
import numpy as np
from fluctlab import GridSpec, SolverConfig, build_spectral_noise, \\
    conservative_noise, initial_state, make_preset, run, stability_bound

steps = {steps}
grid = GridSpec(1, {n})
nonlin = make_preset("power-law-dk", {{"m": 2.0}})
noise = build_spectral_noise(conservative_noise(4, 0.1), grid)
rho0 = initial_state(grid, kind="sine", offset=1.0, amplitude=0.5)
dt = 0.5 * stability_bound(rho0, nonlin, noise, SolverConfig(dt=1e-9, t_end=1e-9))
cfg = SolverConfig(dt=dt, t_end=steps * dt)
traj = run(rho0, nonlin, noise, cfg, seed=0)  # warm-up
assert not traj.truncated
t0 = time.perf_counter()
run(rho0, nonlin, noise, cfg, seed=0)
print(time.perf_counter() - t0)
"""


def _best_of(fn, args: tuple, repeat: int) -> float:
    fn(*args)  # warm-up; compiles the numba variant on first call
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _kernel_args(name: str, batch: int, n: int) -> tuple:
    rng = np.random.default_rng(0)
    shape = (batch, n) if name.endswith("1") else (batch, n, n)
    u = rng.standard_normal(shape)
    return (u,) if name.startswith("favg") else (u, float(n))


def bench_kernels(batch: int, n: int, repeat: int) -> None:
    print(f"kernel timings, batch={batch}, n={n} "
          f"(2d kernels use n x n), best of {repeat}")
    print(f"{'kernel':<8} {'numpy [us]':>12} {'numba [us]':>12} {'speedup':>9}")
    for name in sorted(kernels.NUMPY_KERNELS):
        args = _kernel_args(name, batch, n)
        t_np = _best_of(kernels.NUMPY_KERNELS[name], args, repeat)
        if kernels.NUMBA_KERNELS:
            t_nb = _best_of(kernels.NUMBA_KERNELS[name], args, repeat)
            print(f"{name:<8} {t_np * 1e6:>12.2f} {t_nb * 1e6:>12.2f} "
                  f"{t_np / t_nb:>8.2f}x")
        else:
            print(f"{name:<8} {t_np * 1e6:>12.2f} {'-':>12} {'-':>9}")


def bench_solver(n: int, fallback: bool, steps: int = 2000) -> None:
    snippet = _SOLVER_SNIPPET.format(n=n, steps=steps)
    backend = "numba" if kernels.HAS_NUMBA else "numpy"
    out = subprocess.run([sys.executable, "-c", snippet],
                         capture_output=True, text=True, check=True)
    print(f"trajectory, {steps} steps at n={n} ({backend} backend): "
          f"{float(out.stdout):.3f} s")
    if fallback and kernels.HAS_NUMBA:
        env = dict(os.environ)
        env["FLUCTLAB_DISABLE_NUMBA"] = "1"
        out = subprocess.run([sys.executable, "-c", snippet],
                             capture_output=True, text=True, check=True, env=env)
        print(f"trajectory, {steps} steps at n={n} (numpy fallback): "
              f"{float(out.stdout):.3f} s")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=256,
                        help="cells per axis (default 256; 2d kernels use n^2)")
    parser.add_argument("--batch", type=int, default=8,
                        help="fields advanced together (default 8)")
    parser.add_argument("--repeat", type=int, default=50,
                        help="timing repetitions, best is reported (default 50)")
    parser.add_argument("--solver-fallback", action="store_true",
                        help="also time a full trajectory without numba")
    args = parser.parse_args(argv)
    bench_kernels(args.batch, args.n, args.repeat)
    bench_solver(args.n, args.solver_fallback)
    return 0


if __name__ == "__main__":
    sys.exit(main())
