"""Benchmark every Table 2 matrix found in a directory with all four algorithms.

    python scripts/run_table2.py data/suitesparse --threads 8 --out table2.csv

Matrices are looked up as <dir>/<name>.mtx or <dir>/<name>/<name>.mtx (the
layout of the unpacked SuiteSparse tarballs).
"""

import argparse
import sys
from pathlib import Path

from brmerge.bench import ALGORITHMS, BenchConfig, emit_csv, format_table, run_benchmark
from brmerge.mmio import load_csr
from brmerge.pipelines import default_threads

NAMES = ["m133-b3", "mac_econ_fwd500", "patents_main", "webbase-1M", "mc2depi", "scircuit", "delaunay_n24",
         "mario002", "cage15", "cage12", "majorbasis", "wb-edu", "offshore", "2cubes_sphere", "poisson3Da",
         "filter3D", "cop20k_A", "mono_500Hz", "conf5_4-8x8-05", "cant", "hood", "consph", "shipsec1", "pwtk",
         "rma10", "pdb1HYS"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("directory", type=Path)
    ap.add_argument("--threads", type=int, default=default_threads())
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--warmup", type=int, default=1)
    ap.add_argument("--algo", action="append", choices=list(ALGORITHMS))
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    reports = []
    for name in NAMES:
        path = next((p for p in (args.directory / f"{name}.mtx", args.directory / name / f"{name}.mtx")
                     if p.is_file()), None)
        if path is None:
            continue
        a = load_csr(path)
        for algo in args.algo or list(ALGORITHMS):
            cfg = BenchConfig(path, algo, args.threads, args.warmup, args.runs)
            reports.append(run_benchmark(cfg, a))
            print(format_table(reports[-1:]).splitlines()[-1], file=sys.stderr, flush=True)
    if args.out:
        with open(args.out, "w") as f:
            emit_csv(reports, f)
    else:
        sys.stdout.write(format_table(reports))


if __name__ == "__main__":
    main()
