#!/usr/bin/env python3
"""Compare the numba and numpy kernel backends.

Times the ansatz gate loop and the exact CVaR kernel on both backends, then a
full VQE run per backend in a subprocess (the backend is picked at import time
from VQEFACTOR_DISABLE_NUMBA). Prints one JSON object.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from vqefactor import _kernels_numba, _kernels_numpy
from vqefactor.simulator import AnsatzSpec, CompiledAnsatz

BACKENDS = {"numba": _kernels_numba, "numpy": _kernels_numpy}

E2E_SNIPPET = """
import time
from vqefactor import kernels
from vqefactor.instance import make_benchmark_instance
from vqefactor.simulator import AnsatzSpec
from vqefactor.vqe import RunConfig, run_vqe
inst = make_benchmark_instance({n})
cfg = RunConfig(inst, AnsatzSpec("linear_cnot", inst.N, {L}), alpha=0.01, seed=0)
run_vqe(cfg)  # warm-up, includes jit compilation
start = time.perf_counter()
rec = run_vqe(cfg)
print(kernels.BACKEND, time.perf_counter() - start, rec.trace.n_evals)
"""


def best_of(fn, runs: int) -> float:
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_gates(N: int, L: int, runs: int) -> dict:
    circuit = CompiledAnsatz(AnsatzSpec("linear_cnot", N, L))
    ops, q0, q1 = circuit.ops, circuit.q0, circuit.q1
    angles = np.random.default_rng(0).uniform(-np.pi, np.pi, ops.size)
    out = {}
    for name, mod in BACKENDS.items():
        state = np.zeros(1 << N)

        def run():
            state[:] = 0.0
            state[0] = 1.0
            mod.apply_gates(state, N, ops, q0, q1, angles)

        run()
        out[name] = best_of(run, runs)
    return out


def bench_cvar(N: int, runs: int) -> dict:
    rng = np.random.default_rng(1)
    costs = rng.integers(0, 1 << 20, 1 << N).astype(np.float64)
    order = np.argsort(costs, kind="stable").astype(np.int64)
    sorted_costs = costs[order]
    probs = rng.dirichlet(np.ones(1 << N))
    out = {}
    for name, mod in BACKENDS.items():
        mod.cvar_exact_sorted(probs, order, sorted_costs, 0.01)
        out[name] = best_of(lambda: mod.cvar_exact_sorted(probs, order, sorted_costs, 0.01), runs)
    return out


def bench_end_to_end(n: int, L: int) -> dict:
    out = {}
    for name, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, VQEFACTOR_DISABLE_NUMBA=flag)
        res = subprocess.run(
            [sys.executable, "-c", E2E_SNIPPET.format(n=n, L=L)], env=env, capture_output=True, text=True, check=True
        )
        backend, seconds, evals = res.stdout.split()
        assert backend == name, f"expected {name} backend, got {backend}"
        out[name] = {"seconds": float(seconds), "evals": int(evals)}
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--layers", type=int, default=4)
    parser.add_argument("--qubits", type=int, nargs="+", default=[6, 10, 14, 18])
    parser.add_argument("--e2e-n", type=int, default=253, help="instance for the end-to-end VQE timing")
    args = parser.parse_args()

    report = {"gates": {}, "cvar_exact": {}}
    for N in args.qubits:
        g = bench_gates(N, args.layers, args.runs)
        c = bench_cvar(N, args.runs)
        report["gates"][N] = {**g, "speedup": g["numpy"] / g["numba"]}
        report["cvar_exact"][N] = {**c, "speedup": c["numpy"] / c["numba"]}
    e2e = bench_end_to_end(args.e2e_n, args.layers)
    e2e["speedup"] = e2e["numpy"]["seconds"] / e2e["numba"]["seconds"]
    report["vqe_run"] = {"n": args.e2e_n, **e2e}
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
