#!/usr/bin/env python3
"""Benchmark the compiled RK4 moment kernel against the NumPy fallback.

Workloads are the two bundled joint systems (4x4 single-mode and 8x8
two-mode cascades), each integrated for a fixed number of steps. Run from
the repository root after an editable install:

    python benchmarks/bench_rk4.py [--steps N] [--repeats R]
"""

import argparse
import time

import numpy as np

import cohobs as ch
from cohobs import _rk4_py, experiments
from cohobs.config import parse_config

try:
    from cohobs import _rk4_cy
except ImportError:
    _rk4_cy = None


def build_workload(name):
    config = parse_config(experiments.builtin_config(name))
    obs, report = ch.synthesize_covariance_tracking(config.plant, config.observer.K)
    assert report.feasible
    joint = ch.build_joint_system(config.plant, obs)
    sim = config.simulation
    mu0 = np.concatenate([sim.mu_p0, sim.mu_o0])
    sigma0 = np.block([[sim.sigma_p0, sim.sigma_po0], [sim.sigma_po0.T, sim.sigma_o0]])
    A = np.ascontiguousarray(joint.A)
    noise = np.ascontiguousarray(joint.B @ joint.B.T)
    return A, noise, np.ascontiguousarray(mu0), np.ascontiguousarray(sigma0)


def run_kernel(kernel, workload, n_steps, stride):
    A, noise, mu0, sigma0 = workload
    n = A.shape[0]
    n_samples = n_steps // stride + (0 if n_steps % stride == 0 else 1) + 1
    out_mu = np.empty((n_samples, n))
    out_sigma = np.empty((n_samples, n, n))
    start = time.perf_counter()
    status = kernel.run(A.copy(), noise.copy(), mu0.copy(), sigma0.copy(),
                        1e-3, n_steps, stride, out_mu, out_sigma)
    elapsed = time.perf_counter() - start
    assert status == -1
    return elapsed, out_sigma[-1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    kernels = [("numpy", _rk4_py)]
    if _rk4_cy is not None:
        kernels.append(("compiled", _rk4_cy))
    else:
        print("compiled kernel not built; benchmarking the fallback only")

    stride = args.steps  # sample endpoints only; the loop is what we time
    print(f"{args.steps} steps per run, best of {args.repeats}\n")
    print(f"{'workload':<10} {'backend':<10} {'time [s]':>10} {'steps/s':>12}")
    for name in ("ex1", "ex2"):
        workload = build_workload(name)
        finals = {}
        times = {}
        for backend, kernel in kernels:
            best = min(run_kernel(kernel, workload, args.steps, stride)[0]
                       for _ in range(args.repeats))
            _, finals[backend] = run_kernel(kernel, workload, args.steps, stride)
            times[backend] = best
            print(f"{name:<10} {backend:<10} {best:>10.3f} {args.steps / best:>12.0f}")
        if len(finals) == 2:
            drift = np.abs(finals["numpy"] - finals["compiled"]).max()
            speedup = times["numpy"] / times["compiled"]
            print(f"{'':<10} agreement {drift:.2e}, speedup x{speedup:.1f}\n")


if __name__ == "__main__":
    main()
