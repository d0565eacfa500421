"""Compare the compiled and pure-Python cycle enumeration kernels.

    python3 benchmarks/bench_cycles.py [--pairs 100 200 400] [--delta 2 3] [--repeat 3]

Both kernels receive the same CSR graph; their outputs are checked for
equality before timings are reported.
"""
from __future__ import annotations

import argparse
import time

from supcore import _cycles_py
from supcore.cyclegen import _csr
from supcore.economy import GeneratorConfig, generate_random

try:
    from supcore import _cycles_ext
except ImportError:
    _cycles_ext = None


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--pairs", type=int, nargs="+", default=[100, 200, 400])
    p.add_argument("--delta", type=int, nargs="+", default=[2, 3])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--cpra", default="sensitized")
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args(argv)
    if _cycles_ext is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
    print(f"{'pairs':>6} {'delta':>5} {'cycles':>8} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for n in a.pairs:
        e = generate_random(GeneratorConfig(n_pairs=n, seed=a.seed, cpra=a.cpra))
        ids = sorted(e.ids)
        indptr, indices = _csr(e, ids)
        for d in a.delta:
            tp, ref = best_of(lambda: _cycles_py.enumerate_raw(len(ids), indptr, indices, d), a.repeat)
            if _cycles_ext is None:
                print(f"{n:>6} {d:>5} {len(ref):>8} {tp:>10.4f} {'-':>11} {'-':>8}")
                continue
            tc, got = best_of(lambda: _cycles_ext.enumerate_raw(len(ids), indptr, indices, d), a.repeat)
            if [tuple(c) for c in got] != [tuple(c) for c in ref]:
                raise SystemExit(f"kernel outputs differ at pairs={n}, delta={d}")
            print(f"{n:>6} {d:>5} {len(ref):>8} {tp:>10.4f} {tc:>11.4f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
