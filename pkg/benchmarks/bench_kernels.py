"""Compare the compiled and pure-Python resampling kernels.

    python3 benchmarks/bench_kernels.py [--splits 2000] [--repeat 3]

Prints the best wall time per backend and the speed-up for the chain
(threshold) kernel and the general (min-cut closure) kernel, and checks
that both backends return identical counts.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from empchoice.classes import build_dominance_dag
from empchoice.kernels import available_backends


def _cases(rng):
    x = rng.integers(0, 30, 60).astype(float).reshape(-1, 1)
    yield "threshold (n=60, dim 1)", x, 30
    pts = np.column_stack([rng.integers(15, 25, 25), rng.integers(85, 97, 25) / 100])
    yield "closure (n=25, dim 2)", pts.astype(float), 11
    pts3 = rng.integers(0, 4, (40, 3)).astype(float)
    yield "closure (n=40, dim 3)", pts3, 20


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--splits", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    backends = available_backends()
    print(f"backends: {', '.join(backends)}; splits per call: {args.splits}")
    for name, pts, zu in _cases(rng):
        dag = build_dominance_dag(pts)
        n = pts.shape[0]
        idx = np.array([rng.permutation(n) for _ in range(args.splits)])
        su, sv = 1.0 / zu, 1.0 / (n - zu)
        times, outs = {}, {}
        for bname, mod in backends.items():
            if name.startswith("threshold"):
                def call():
                    return mod.threshold_batch(dag.index, dag.n_nodes, idx, zu, su, sv)
            else:
                def call():
                    return mod.closure_batch(dag.index, dag.n_nodes, dag.edges, idx, zu, su, sv)
            best = np.inf
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                out = call()
                best = min(best, time.perf_counter() - t0)
            times[bname], outs[bname] = best, out
        vals = [su * o[0] - sv * o[1] for o in outs.values()]
        same = all(np.allclose(v, vals[0], rtol=0, atol=1e-12) for v in vals)
        line = "  ".join(f"{b}={t * 1e3:8.2f} ms" for b, t in times.items())
        speed = ""
        if "cython" in times:
            speed = f"  speed-up x{times['python'] / times['cython']:.1f}"
        print(f"{name:<24} {line}{speed}  agree={same}")


if __name__ == "__main__":
    main()
