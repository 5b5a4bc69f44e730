"""Compiled vs pure-Python row reduction mod p.

    python benchmarks/bench_kernels.py [--sizes 50 100 200] [--prime 7] [--repeat 3]

Both kernels must return identical reductions; the table lists the best
time of each over the repeats and the speedup.  A second section times a
full C_p-Tate schedule run under each backend.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time

from redshift import _kernels_py

try:
    from redshift import _kernels
except ImportError:  # extension not built
    _kernels = None


def random_matrix(rng: random.Random, rows: int, cols: int, p: int, density: float) -> list[list[int]]:
    return [[rng.randrange(1, p) if rng.random() < density else 0 for _ in range(cols)] for _ in range(rows)]


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_rref(sizes, p: int, repeat: int, density: float) -> None:
    rng = random.Random(0)
    print(f"rref mod {p}, density {density}")
    print(f"{'size':>6} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for n in sizes:
        a = random_matrix(rng, n, n, p, density)
        py = best_of(lambda: _kernels_py.rref(a, n, p), repeat)
        if _kernels is None:
            print(f"{n:>6} {py:>10.4f} {'-':>11} {'-':>8}")
            continue
        if _kernels.rref(a, n, p) != _kernels_py.rref(a, n, p):
            raise SystemExit(f"kernels disagree at size {n}")
        c = best_of(lambda: _kernels.rref(a, n, p), repeat)
        print(f"{n:>6} {py:>10.4f} {c:>11.4f} {py / c:>7.1f}x")


RUN = ("from redshift.catalog import Variant, cyclic, run_pages; from redshift.fpalg import Window; "
       "import time; t = time.perf_counter(); "
       "run_pages(cyclic(1), Variant.TATE, {p}, Window(-{s}, {s}, 0, 200), threads=1); "
       "print(time.perf_counter() - t)")


def bench_schedule(p: int) -> None:
    s = 2 * (p + p * p + p ** 3) + 1 + 700
    print(f"\nC_p-Tate schedule at p={p}, s in [-{s}, {s}], n in [0, 200]")
    for label, extra in (("python", {"REDSHIFT_PURE_PYTHON": "1"}), ("compiled", {})):
        if label == "compiled" and _kernels is None:
            continue
        env = {k: v for k, v in os.environ.items() if k != "REDSHIFT_PURE_PYTHON"}
        env.update(extra)
        out = subprocess.run([sys.executable, "-c", RUN.format(p=p, s=s)], env=env,
                             capture_output=True, text=True, check=True)
        print(f"{label:>9}: {float(out.stdout):.2f} s")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--prime", type=int, default=7)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--density", type=float, default=0.3)
    ap.add_argument("--no-schedule", action="store_true", help="skip the end-to-end schedule timing")
    args = ap.parse_args()
    bench_rref(args.sizes, args.prime, args.repeat, args.density)
    if not args.no_schedule:
        bench_schedule(args.prime)


if __name__ == "__main__":
    main()
