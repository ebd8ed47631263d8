"""Time the hot kernels under both backends, plus sparse against naive omega.

Each backend runs in a fresh interpreter because the backend switch
(``BLOCKNET_DISABLE_NUMBA``) is read at import time.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeat):
    fn()  # warm-up, includes compilation under numba
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run_cases(repeat):
    from blocknet import Graph, ModelParams
    from blocknet.block_em import VariationalState, omega, omega_naive, qp_simplex_rows
    from blocknet.kernels import BACKEND
    from blocknet.mple import build_design
    from blocknet.simulator import SimConfig, run_chain

    rng = np.random.default_rng(0)

    def graph(n, p):
        a = np.triu(rng.random((n, n)) < p, 1)
        return Graph.from_dense((a | a.T).astype(np.uint8))

    g_cn = graph(1500, 0.01)
    z_cn = rng.integers(0, 5, 1500)
    A = -rng.uniform(0.1, 5, (20000, 20))
    B = rng.normal(size=(20000, 20))
    g_om = graph(300, 0.03)
    xi = rng.dirichlet(np.ones(10), 300)
    st_small = VariationalState(xi, xi.mean(axis=0), rng.uniform(0.05, 0.95, (1, 10, 10)))
    chain_cfg = SimConfig(200, 4, np.full(4, 0.25), ModelParams(-1.5, -3.0, psi=-0.05, gamma=0.2),
                          steps=500_000, seed=1)

    results = {
        "common_neighbor_counts (within design, n=1500)":
            _best(lambda: build_design(g_cn, None, z_cn, "within"), repeat),
        "qp_simplex_rows (20000 x 20)": _best(lambda: qp_simplex_rows(A, B), repeat),
        "omega_naive_loops (n=300, K=10)": _best(lambda: omega_naive(g_om, None, st_small), repeat),
        "gibbs_chain (n=200, 5e5 steps)": _best(lambda: run_chain(chain_cfg), repeat),
    }

    g = graph(1000, 0.01)
    xi = rng.dirichlet(np.ones(50), 1000)
    pi1 = rng.uniform(0.02, 0.98, (1, 50, 50))
    st = VariationalState(xi, xi.mean(axis=0), (pi1 + pi1.transpose(0, 2, 1)) / 2)
    results["omega sparse (n=1000, K=50)"] = _best(lambda: omega(g, None, st), repeat)
    results["omega naive (n=1000, K=50)"] = _best(lambda: omega_naive(g, None, st), 1)
    return BACKEND, results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write the timings here")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        backend, results = run_cases(args.repeat)
        print(json.dumps({"backend": backend, "results": results}))
        return 0
    runs = {}
    for disable in ("0", "1"):
        env = dict(os.environ, BLOCKNET_DISABLE_NUMBA=disable)
        out = subprocess.run([sys.executable, __file__, "--worker", "--repeat", str(args.repeat)],
                             env=env, capture_output=True, text=True, check=True)
        payload = json.loads(out.stdout.strip().splitlines()[-1])
        runs[payload["backend"]] = payload["results"]
    names = list(next(iter(runs.values())))
    print(f"{'case':<50}{'numba s':>12}{'numpy s':>12}{'ratio':>9}")
    for name in names:
        nb, npy = runs.get("numba", {}).get(name, float("nan")), runs["numpy"][name]
        print(f"{name:<50}{nb:>12.4f}{npy:>12.4f}{npy / nb:>9.1f}")
    for backend, res in runs.items():
        speedup = res["omega naive (n=1000, K=50)"] / res["omega sparse (n=1000, K=50)"]
        print(f"sparse/naive omega speedup under {backend}: {speedup:.0f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(runs, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
