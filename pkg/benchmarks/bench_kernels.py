"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--out bench.json]

Each kernel is timed on identical inputs under both backends; the outputs
are checked against each other before any timing is reported.
"""
from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from locacc._kernels import _pykernels

try:
    from locacc._kernels import _ckernels
except ImportError:
    _ckernels = None


def _hermitian_stack(rng, n, d):
    g = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    return g + np.conj(np.swapaxes(g, 1, 2))


def _spectra(rng, n, d):
    return rng.dirichlet(np.ones(d), size=n)


def cases(rng):
    """(name, args builder, kernel name, output comparator tolerance)."""
    out = []
    for n, d in ((4096, 2), (4096, 3), (512, 6)):
        out.append((f"jacobi_eigh n={n} d={d}", "jacobi_eigh", (_hermitian_stack(rng, n, d),), 1e-10))
    for n, d in ((100_000, 2), (50_000, 3), (10_000, 6)):
        out.append((f"subentropy n={n} d={d}", "subentropy", (_spectra(rng, n, d),), 1e-10))
    for d in (2, 4, 8):
        angles = rng.uniform(0, 2 * np.pi, d * (d - 1))
        out.append((f"givens_unitary d={d}", "givens_unitary", (angles, d), 1e-12))
    return out


def _first(x):
    return x[0] if isinstance(x, tuple) else x


def run(repeat=5, seed=0):
    if _ckernels is None:
        raise SystemExit("compiled kernels are not built; reinstall without LOCACC_NO_EXT")
    rng = np.random.default_rng(seed)
    rows = []
    for name, kernel, args, tol in cases(rng):
        c_fn, py_fn = getattr(_ckernels, kernel), getattr(_pykernels, kernel)
        a, b = np.asarray(_first(c_fn(*args))), np.asarray(_first(py_fn(*args)))
        dev = float(np.max(np.abs(a - b)))
        if dev > tol:
            raise SystemExit(f"{name}: backends disagree by {dev:.2e}")
        number = 1 if kernel != "givens_unitary" else 200
        tc = min(timeit.repeat(lambda: c_fn(*args), number=number, repeat=repeat)) / number
        tp = min(timeit.repeat(lambda: py_fn(*args), number=number, repeat=repeat)) / number
        rows.append({"case": name, "cython_s": tc, "python_s": tp, "speedup": tp / tc, "max_deviation": dev})
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="also write the rows as JSON")
    args = p.parse_args(argv)
    rows = run(args.repeat, args.seed)
    print(f"{'case':<28}{'cython [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}")
    for r in rows:
        print(f"{r['case']:<28}{1e3 * r['cython_s']:>14.3f}{1e3 * r['python_s']:>14.3f}{r['speedup']:>9.1f}x")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
