"""Benchmark harness: square a matrix, time it, report nprod/nnz/CR/GFLOPS."""

from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, TextIO

import numpy as np

from .baselines import spgemm_hash, spgemm_heap
from .csr import CsrMatrix, DimensionError, first_difference, oracle_spgemm, validate
from .mmio import MatrixMarketError, load_csr
from .pipelines import compression_ratio, default_threads, row_nprod, spgemm_precise, spgemm_upper

ALGORITHMS: dict[str, Callable[[CsrMatrix, CsrMatrix, int], CsrMatrix]] = {
    "brmerge-upper": spgemm_upper,
    "brmerge-precise": spgemm_precise,
    "heap": spgemm_heap,
    "hash": spgemm_hash,
}

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3
VERIFY_TOL = 1e-12


class VerificationError(RuntimeError):
    def __init__(self, message: str, report: BenchReport | None = None):
        super().__init__(message)
        self.report = report


@dataclass
class BenchConfig:
    matrix: Path
    algo: str = "brmerge-precise"
    threads: int = field(default_factory=default_threads)
    warmup: int = 1
    runs: int = 10
    verify: bool = False
    verify_cap: int = 20_000
    output: str = "table"

    def __post_init__(self):
        self.matrix = Path(self.matrix)
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.runs < 1 or self.threads < 1 or self.warmup < 0:
            raise ValueError("runs and threads must be >= 1, warmup >= 0")


@dataclass
class BenchReport:
    matrix: str
    algo: str
    threads: int
    rows: int
    nnz: int
    nnz_per_row: float
    max_nnz_per_row: int
    nprod: int
    nnz_c: int
    compression_ratio: float
    times: list[float]
    mean_time: float
    verified: bool | None = None

    @property
    def gflops(self) -> float:
        return 2.0 * self.nprod / (self.mean_time * 1e9) if self.mean_time > 0 else float("inf")


CSV_FIELDS = ["matrix", "algo", "threads", "rows", "nnz", "nnz_per_row", "max_nnz_per_row",
              "nprod", "nnz_c", "compression_ratio", "times", "mean_time", "gflops", "verified"]


def matrix_stats(a: CsrMatrix) -> tuple[int, int, float, int]:
    lengths = a.row_lengths()
    per_row = a.nnz / a.rows if a.rows else 0.0
    return a.rows, a.nnz, per_row, int(lengths.max()) if a.rows else 0


def verify_product(a: CsrMatrix, c: CsrMatrix, threads: int, verify_cap: int) -> list[str]:
    """Check ``c`` and all four pipelines against one reference; list the failures."""
    if a.rows <= verify_cap:
        ref_name, ref = "oracle", oracle_spgemm(a, a)
    else:
        ref_name, ref = "brmerge-precise", spgemm_precise(a, a, threads)
    problems = []
    candidates = [("timed result", c)] + [(n, f(a, a, threads)) for n, f in ALGORITHMS.items()]
    for name, m in candidates:
        bad = validate(m)
        if bad:
            problems.append(f"{name}: invalid CSR ({bad[0].kind} at row {bad[0].row})")
            continue
        diff = first_difference(m, ref, VERIFY_TOL)
        if diff:
            problems.append(f"{name} vs {ref_name}: {diff}")
    return problems


def run_benchmark(cfg: BenchConfig, a: CsrMatrix | None = None) -> BenchReport:
    """Square the matrix ``cfg.warmup + cfg.runs`` times, timing the last ``runs``.

    The clock covers the whole pipeline call (its temporary allocations
    included) but not file loading. Raises VerificationError on a mismatch
    when ``cfg.verify`` is set.
    """
    if a is None:
        a = load_csr(cfg.matrix)
    if a.rows != a.cols:
        raise DimensionError(f"A^2 needs a square matrix, got {a.rows}x{a.cols}")
    fn = ALGORITHMS[cfg.algo]
    for _ in range(cfg.warmup):
        c = fn(a, a, cfg.threads)
        del c
    times = []
    for _ in range(cfg.runs):
        t0 = time.perf_counter()
        c = fn(a, a, cfg.threads)
        times.append(time.perf_counter() - t0)
        last = c
        del c
    nprod = int(row_nprod(a, a, cfg.threads).sum())
    rows, nnz, per_row, max_row = matrix_stats(a)
    report = BenchReport(
        matrix=cfg.matrix.name.removesuffix(".mtx"),
        algo=cfg.algo,
        threads=cfg.threads,
        rows=rows,
        nnz=nnz,
        nnz_per_row=per_row,
        max_nnz_per_row=max_row,
        nprod=nprod,
        nnz_c=last.nnz,
        compression_ratio=compression_ratio(nprod, last.nnz) if last.nnz else float("nan"),
        times=times,
        mean_time=float(np.mean(times)),
    )
    if cfg.verify:
        problems = verify_product(a, last, cfg.threads, cfg.verify_cap)
        report.verified = not problems
        if problems:
            raise VerificationError("\n".join(problems), report)
    return report


def _csv_value(x) -> str:
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, list):
        return ";".join(f"{t:.6g}" for t in x)
    return str(x)


def emit_csv(reports: list[BenchReport], dest: TextIO):
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        w.writerow([_csv_value(getattr(r, f)) for f in CSV_FIELDS])


def format_table(reports: list[BenchReport]) -> str:
    head = ["Name", "Algo", "p", "Rows", "Nnz", "Nnz/row", "Max nnz/row", "Nprod of A^2",
            "Nnz of A^2", "CR of A^2", "Mean time (s)", "GFLOPS", "Verified"]
    body = []
    for r in reports:
        body.append([r.matrix, r.algo, str(r.threads), str(r.rows), str(r.nnz), f"{r.nnz_per_row:.1f}",
                     str(r.max_nnz_per_row), str(r.nprod), str(r.nnz_c), f"{r.compression_ratio:.2f}",
                     f"{r.mean_time:.6f}", f"{r.gflops:.3f}",
                     "-" if r.verified is None else ("yes" if r.verified else "NO")])
    widths = [max(len(row[j]) for row in [head] + body) for j in range(len(head))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in [head] + body]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="brmerge-bench", description="Time A^2 with a BRMerge or baseline SpGEMM.")
    p.add_argument("--matrix", action="append", required=True, type=Path,
                   help="Matrix Market file (repeatable)")
    p.add_argument("--algo", choices=list(ALGORITHMS), default="brmerge-precise")
    p.add_argument("--threads", type=int, default=default_threads())
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--verify", action="store_true", help="check all pipelines against the oracle")
    p.add_argument("--verify-cap", type=int, default=20_000,
                   help="largest row count checked against the dense-accumulator oracle")
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1 or args.runs < 1 or args.warmup < 0:
        parser.error("--threads and --runs must be >= 1, --warmup >= 0")
    reports = []
    status = EXIT_OK
    for path in args.matrix:
        cfg = BenchConfig(path, args.algo, args.threads, args.warmup, args.runs,
                          args.verify, args.verify_cap, args.format)
        try:
            reports.append(run_benchmark(cfg))
        except (OSError, MatrixMarketError, DimensionError) as e:
            print(f"brmerge-bench: {path}: {e}", file=sys.stderr)
            return EXIT_IO
        except VerificationError as e:
            print(f"brmerge-bench: {path}: verification failed\n{e}", file=sys.stderr)
            reports.append(e.report)
            status = EXIT_VERIFY
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        if args.format == "csv":
            emit_csv(reports, out)
        else:
            out.write(format_table(reports))
    finally:
        if args.out:
            out.close()
    return status


if __name__ == "__main__":
    sys.exit(main())
