#!/usr/bin/env python3
"""Benchmark the compiled kernels against their pure-numpy fallbacks.

Each hot kernel ships in two implementations selected at import time by
``NAMCOUNT_BACKEND`` (see ``namcount.backend``).  This script times both
variants side by side in one process and cross-checks that they agree.

Expect the CSR traversal kernels (pair/column sums, triangle count) to win
big under numba, while the dense matmul rows are a fairer fight: the numpy
"naive" variant is a single BLAS call.

Usage:
    python3 benchmarks/bench_kernels.py [--n 800] [--repeats 3] [--csv out.csv]
"""

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from namcount import erdos_renyi
from namcount.backend import HAS_NUMBA
from namcount.mechanisms import Mechanism, MechanismKind
from namcount.nam import gnam
from namcount import kernels as K


def best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - started)
    return best, result


def agree(a, b):
    return bool(np.allclose(a, b, rtol=1e-9, atol=1e-9))


def build_cases(n, density, block, seed):
    g = erdos_renyi(n, density, seed=seed)
    nam = gnam(g, Mechanism(MechanismKind.RR, 1.0), seed=seed)
    mat = nam.entries
    indptr, indices = g.indptr, g.indices
    bounds = np.full(n, 5.0)
    square = mat @ mat
    return [
        ("matmul_naive", K._matmul_naive_nb if HAS_NUMBA else None,
         K._matmul_naive_np, (mat, mat)),
        ("matmul_blocked", K._matmul_blocked_nb if HAS_NUMBA else None,
         K._matmul_blocked_np, (mat, mat, block)),
        ("frob_inner", K._frob_inner_nb if HAS_NUMBA else None,
         K._frob_inner_np, (square, mat)),
        ("pair_sums", K._pair_sums_nb if HAS_NUMBA else None,
         K._pair_sums_np, (indptr, indices, square, bounds, True)),
        ("column_sums", K._column_sums_nb if HAS_NUMBA else None,
         K._column_sums_np, (indptr, indices, square, bounds)),
        ("triangle_count", K._triangle_count_nb if HAS_NUMBA else None,
         K._triangle_count_np, (indptr, indices)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=800,
                        help="node count for the benchmark graph")
    parser.add_argument("--density", type=float, default=0.05,
                        help="edge probability of the benchmark graph")
    parser.add_argument("--block", type=int, default=64,
                        help="tile width for the blocked multiply")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repetitions; best run is reported")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--csv", type=Path, default=None,
                        help="also write the table to this CSV file")
    args = parser.parse_args(argv)
    if args.n < 2 or args.repeats < 1:
        parser.error("--n must be >= 2 and --repeats >= 1")

    cases = build_cases(args.n, args.density, args.block, args.seed)
    if HAS_NUMBA:
        for _, nb, _np, fargs in cases:  # compile outside the timed region
            nb(*fargs)
    else:
        print("numba not importable; timing the numpy fallback only\n")

    header = ("kernel", "numba_ms", "numpy_ms", "speedup", "agree")
    rows = []
    for name, nb, np_fn, fargs in cases:
        np_time, np_out = best_of(np_fn, fargs, args.repeats)
        if nb is None:
            rows.append((name, "", f"{np_time * 1e3:.3f}", "", ""))
            continue
        nb_time, nb_out = best_of(nb, fargs, args.repeats)
        rows.append((name, f"{nb_time * 1e3:.3f}", f"{np_time * 1e3:.3f}",
                     f"{np_time / nb_time:.2f}x",
                     "yes" if agree(nb_out, np_out) else "NO"))

    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(5)]
    print(f"graph: n={args.n} density={args.density} block={args.block} "
          f"repeats={args.repeats} seed={args.seed}")
    for row in [header] + rows:
        print("  ".join(str(v).ljust(w) for v, w in zip(row, widths)))

    if args.csv is not None:
        args.csv.parent.mkdir(parents=True, exist_ok=True)
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        print(f"\nwrote {args.csv}")

    bad = [r[0] for r in rows if r[4] == "NO"]
    if bad:
        print(f"backend disagreement in: {', '.join(bad)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
