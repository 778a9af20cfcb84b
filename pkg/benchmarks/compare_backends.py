"""Time the jitted kernels against the pure-numpy fallback.

The backend is chosen at import time from the STLSBB_DISABLE_JIT
environment variable, so the comparison runs each side in its own
subprocess.  Three workloads are timed:

  bb_loop        full BB iteration on a factored quadratic (the solver
                 hot path, one jitted call covering hundreds of O(n)
                 iterations)
  hessian_apply  repeated Householder-factored Hessian products
  scalar_steps   individual steplength kernel calls from Python (shows
                 per-call dispatch overhead, where the JIT can lose)

Usage: python benchmarks/compare_backends.py
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _payloads():
    from stlsbb import kernels, quadratic
    from stlsbb.quadratic import SpectrumSetting

    inst = quadratic.generate_instance(2000, SpectrumSetting(1, 1e4), seed=7)
    x0 = np.ones(inst.dim)
    a0 = quadratic.default_alpha0(inst, x0)

    def bb_loop():
        rows = kernels.raw_bb_loop(
            inst.w1, inst.w2, inst.w3, inst.eigenvalues, inst.linear,
            x0, a0, 1e-10, 2000, kernels.POLICY_FAMILY, 20.0, 1,
        )
        return rows[-1][1]

    z = np.linspace(-1.0, 1.0, inst.dim)

    def hessian_apply():
        acc = 0.0
        for _ in range(400):
            acc += kernels.hessian_apply(
                inst.w1, inst.w2, inst.w3, inst.eigenvalues, z,
            )[0]
        return acc

    def scalar_steps():
        acc = 0.0
        ss, yy, sy = 2.0, 5.0, 3.0
        for k in range(50_000):
            acc += kernels.policy_step(
                kernels.POLICY_FAMILY, 1.0 + 1e-4 * k, 1, ss, yy, sy, acc, k,
            )
        return acc

    return [("bb_loop", bb_loop), ("hessian_apply", hessian_apply),
            ("scalar_steps", scalar_steps)]


def _time(fn, repeats=5):
    fn()  # warmup; first call pays any JIT compilation
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def worker():
    from stlsbb._jit import HAVE_NUMBA, JIT_ENABLED

    out = {"jit": JIT_ENABLED, "have_numba": HAVE_NUMBA, "times": {}}
    for name, fn in _payloads():
        out["times"][name] = _time(fn)
    print(json.dumps(out))


def _run_side(disable):
    env = dict(os.environ)
    if disable:
        env["STLSBB_DISABLE_JIT"] = "1"
    else:
        env.pop("STLSBB_DISABLE_JIT", None)
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker"],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker()
        return

    fallback = _run_side(disable=True)
    jit = _run_side(disable=False)
    if not jit["have_numba"]:
        print("numba is not installed; only the numpy fallback was timed")
        for name, t in fallback["times"].items():
            print(f"  {name:<14} {t * 1e3:9.3f} ms")
        return

    print(f"{'workload':<14} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for name in fallback["times"]:
        tf = fallback["times"][name]
        tj = jit["times"][name]
        print(f"{name:<14} {tf * 1e3:12.3f} {tj * 1e3:12.3f} {tf / tj:8.1f}x")


if __name__ == "__main__":
    main()
