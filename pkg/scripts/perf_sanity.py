"""Compare brmerge-precise against the baselines on the high-CR synthetic suite."""

import argparse
import sys

from brmerge.bench import ALGORITHMS, BenchConfig, emit_csv, format_table, run_benchmark
from brmerge.pipelines import default_threads
from brmerge.randmat import high_cr_suite

ap = argparse.ArgumentParser()
ap.add_argument("--threads", type=int, default=default_threads())
ap.add_argument("--runs", type=int, default=5)
ap.add_argument("--scale", type=float, default=1.0)
ap.add_argument("--csv", action="store_true")
args = ap.parse_args()

reports = []
for name, a in high_cr_suite(args.scale).items():
    for algo in ALGORITHMS:
        reports.append(run_benchmark(BenchConfig(f"{name}.mtx", algo, args.threads, 1, args.runs), a))

if args.csv:
    emit_csv(reports, sys.stdout)
else:
    sys.stdout.write(format_table(reports))
    by = {(r.matrix, r.algo): r.mean_time for r in reports}
    names = list(dict.fromkeys(r.matrix for r in reports))
    wins = sum(by[(n, "brmerge-precise")] <= by[(n, "heap")] for n in names)
    print(f"\nbrmerge-precise <= heap on {wins}/{len(names)} matrices")
