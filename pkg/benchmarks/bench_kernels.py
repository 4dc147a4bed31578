"""Time the compiled and pure-Python kernels on identical inputs.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Prints one line
per (kernel, case) with the best time of each backend, the speed-up and the
largest difference between the two outputs.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from quasispline import kernels
from quasispline.bsplines import derivative_tables
from quasispline.domains import unit_cube
from quasispline.functions import ridge_family
from quasispline.multiscale import quasi_interpolant


def _best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_bspline(repeat: int, rng) -> list[tuple]:
    rows = []
    for m in (1, 3):
        table = derivative_tables(m, 0)[0]
        t = rng.uniform(-1, m + 2, 200_000)
        fns = {b: (lambda b=b: kernels.bspline_eval(table, t, backend=b)) for b in ("python", "cython")}
        diff = float(np.max(np.abs(fns["python"]() - fns["cython"]())))
        rows.append(("bspline_eval", f"m={m} n={t.size}", _best(fns["python"], repeat), _best(fns["cython"], repeat), diff))
    return rows


def bench_field(repeat: int, rng) -> list[tuple]:
    rows = []
    for d, k, n in ((1, 8, 100_000), (2, 5, 20_000)):
        F = quasi_interpolant(ridge_family(d, 0.75, 1)[0], unit_cube(d), k, 2)
        x = rng.random((n, d))
        lam = (1,) + (0,) * (d - 1)
        fns = {b: (lambda b=b: F.eval(x, lam, backend=b)) for b in ("python", "cython")}
        diff = float(np.max(np.abs(fns["python"]() - fns["cython"]())))
        rows.append(("field_eval", f"d={d} k={k} n={n}", _best(fns["python"], repeat), _best(fns["cython"], repeat), diff))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'case':<22}{'python s':>11}{'cython s':>11}{'speed-up':>10}{'max diff':>11}")
    for name, case, tp, tc, diff in bench_bspline(args.repeat, rng) + bench_field(args.repeat, rng):
        print(f"{name:<14}{case:<22}{tp:>11.4f}{tc:>11.4f}{tp / tc:>9.1f}x{diff:>11.1e}")


if __name__ == "__main__":
    main()
