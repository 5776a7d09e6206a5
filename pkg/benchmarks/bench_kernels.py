"""Throughput comparison of the numba chunk kernels vs the pure-numpy path.

Usage: python benchmarks/bench_kernels.py [--steps N] [--json out.json]

Both backends consume identical substreams (the benchmark asserts the
traces agree before timing), so the comparison isolates the arithmetic
path. Includes a jit warmup pass.
"""

import argparse
import json
import time

import numpy as np

from mtmlab import oracle as orc
from mtmlab.model import RwProposal, WeightSpec, standard_gaussian
from mtmlab.samplers import IDEAL, LAZY_MTM, MH, MTM, KernelSpec, run_chain

CASES = [
    ("mh d=64", MH, dict(d=64, sigma=0.3, theta=0.5, n=1)),
    ("ideal d=64", IDEAL, dict(d=64, sigma=0.35, theta=0.5, n=1)),
    ("mtm n=16 d=8", MTM, dict(d=8, sigma=0.5, theta=0.5, n=16)),
    ("mtm n=256 d=8", MTM, dict(d=8, sigma=0.5, theta=1.0, n=256)),
    ("lazy-mtm n=16 d=4", LAZY_MTM, dict(d=4, sigma=0.7, theta=0.5, n=16)),
]


def spec_of(kind, d, sigma, theta, n):
    return KernelSpec(
        kind=kind,
        target=standard_gaussian(d),
        proposal=RwProposal(sigma=sigma, d=d),
        weight=WeightSpec(theta),
        n_tries=n,
    )


def time_chain(spec, steps, backend):
    x0 = np.zeros(spec.target.d)
    t0 = time.perf_counter()
    trace = run_chain(spec, x0, steps=steps, seed=1234, backend=backend)
    return time.perf_counter() - t0, trace


def bench_chains(steps):
    rows = []
    for label, kind, params in CASES:
        spec = spec_of(kind, **params)
        run_chain(spec, np.zeros(params["d"]), steps=32, seed=0, backend="numba")  # warmup
        t_nb, tr_nb = time_chain(spec, steps, "numba")
        t_np, tr_np = time_chain(spec, steps, "numpy")
        assert np.allclose(tr_nb.states, tr_np.states, atol=1e-9), label
        rows.append(
            {
                "case": label,
                "steps": steps,
                "numba_s": t_nb,
                "numpy_s": t_np,
                "speedup": t_np / t_nb,
            }
        )
    return rows


def bench_conductance(m=18):
    gen = np.random.default_rng(5)
    pi = gen.dirichlet(np.ones(m))
    q = np.vstack([gen.dirichlet(np.ones(m)) for _ in range(m)])
    spec = orc.FiniteChainSpec(pi=pi, q=q, w=np.exp(gen.uniform(-1, 1, (m, m))), n=1)
    P = orc.build_mh(spec)
    orc.conductance(P, pi, backend="numba")  # warmup
    t0 = time.perf_counter()
    a = orc.conductance(P, pi, backend="numba")
    t_nb = time.perf_counter() - t0
    t0 = time.perf_counter()
    b = orc.conductance(P, pi, backend="numpy")
    t_np = time.perf_counter() - t0
    assert abs(a - b) < 1e-12
    return {"case": f"conductance m={m}", "numba_s": t_nb, "numpy_s": t_np,
            "speedup": t_np / t_nb}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--json", type=str, default=None)
    args = parser.parse_args()

    rows = bench_chains(args.steps)
    rows.append(bench_conductance())
    width = max(len(r["case"]) for r in rows)
    print(f"{'case':<{width}}  {'numba':>9}  {'numpy':>9}  {'speedup':>8}")
    for r in rows:
        print(f"{r['case']:<{width}}  {r['numba_s']:>8.3f}s  {r['numpy_s']:>8.3f}s  "
              f"{r['speedup']:>7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
