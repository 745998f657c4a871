"""Closure benchmark: compiled kernel vs numpy fallback, and thread counts.

    python benchmarks/bench_closure.py [--delta max|min] [--repeats 3] [--threads 1 4 8]

Both kernels enumerate the same group; every order is compared with the
classical order formula.
"""

import argparse
import time

from oddform.heisenberg import delta_max, delta_min
from oddform.orders import expected_eu_order
from oddform.ring import preset
from oddform.subgroup_engine import backend, closure, full_eu_generators


def bench(ctx, gens, kernel, threads, repeats):
    times, sizes = [], set()
    for _ in range(repeats):
        t0 = time.perf_counter()
        G = closure(ctx, gens, threads=threads, kernel=kernel)
        times.append(time.perf_counter() - t0)
        sizes.add(len(G))
    return min(times), sizes


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", choices=("max", "min"), default="max")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 4, 8])
    args = ap.parse_args(argv)

    ctx = preset("F2")
    params = {"max": delta_max(ctx), "min": delta_min(ctx)}
    print(f"{'kernel':<10}{'delta':<7}{'threads':>8}{'order':>10}{'best s':>10}  oracle")
    rows = []
    if "compiled" in backend.available():
        gens = full_eu_generators(ctx, params[args.delta])
        for t in args.threads:
            rows.append(("compiled", args.delta, t) + bench(ctx, gens, backend.get("compiled"), t, args.repeats))
    else:
        print("compiled kernel not built; timing the python kernel only")
    gens = full_eu_generators(ctx, params[args.delta])
    rows.append(("python", args.delta, 1) + bench(ctx, gens, backend.get("python"), 1, args.repeats))
    for kernel, kind, t, best, sizes in rows:
        (order,) = sizes
        ok = "ok" if order == expected_eu_order(ctx, kind) else "MISMATCH"
        print(f"{kernel:<10}{kind:<7}{t:>8}{order:>10}{best:>10.3f}  {ok}")


if __name__ == "__main__":
    main()
