"""Time the compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each kernel runs on identical inputs under both backends; the table lists the
best wall time of ``--repeat`` runs and the speedup of the compiled backend.
The largest absolute difference between the two outputs is also reported.
"""
from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from projlab.kernels import available_backends
from projlab.linalg_core import as_generator
from projlab.two_projection_model import theta_grid


def _cases(rng):
    _, x, e = theta_grid(800)
    lo, hi = np.ascontiguousarray(e[:-1]), np.ascontiguousarray(e[1:])
    w = np.full(800, 1.0 / 800)
    pts = np.sort(rng.uniform(0.0, 1.0, 2000))
    pw = np.full(2000, 1.0 / 2000)
    k, sweeps = 32, 200
    x0 = np.sort(rng.uniform(0.05, 0.95, k))
    field = np.linspace(0.0, 1.0, 1025) * 32.0
    normals = rng.standard_normal((sweeps, k))
    uniforms = rng.uniform(size=(sweeps, k))
    return {
        "cell_log_kernel (800 cells)": lambda m: m.cell_log_kernel(lo, hi),
        "cell_log_energy (800 cells)": lambda m: m.cell_log_energy(lo, hi, w),
        "offdiag_log_energy (2000 atoms)": lambda m: m.offdiag_log_energy(pts, pw),
        "metropolis_sweeps (k=32, 200 sweeps)": lambda m: m.metropolis_sweeps(
            x0.copy(), 0.0, 0.0, field, 0.05, normals, uniforms)[0],
    }


def _max_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the results to this file")
    args = ap.parse_args(argv)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the numpy fallback is available", file=sys.stderr)
    rows = []
    for name, fn in _cases(as_generator(7)).items():
        row = {"kernel": name}
        outs = {}
        for bname, mod in backends.items():
            outs[bname] = fn(mod)
            row[bname] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
            row["max_abs_diff"] = _max_diff(outs["python"], outs["cython"])
        rows.append(row)
    print(f"{'kernel':40s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s} {'max diff':>10s}")
    for r in rows:
        c = f"{r['cython']:12.5f}" if "cython" in r else f"{'n/a':>12s}"
        s = f"{r['speedup']:9.1f}" if "speedup" in r else f"{'n/a':>9s}"
        d = f"{r['max_abs_diff']:10.1e}" if "max_abs_diff" in r else f"{'n/a':>10s}"
        print(f"{r['kernel']:40s} {r['python']:12.5f} {c} {s} {d}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
