"""BRMerge-Upper and BRMerge-Precise SpGEMM pipelines.

Both are fork-join: every step is a parallel loop over contiguous row
ranges, with a barrier between steps. Threads write disjoint row ranges of
shared arrays. The numba kernels release the GIL, so the threads run
concurrently.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .csr import CsrMatrix, DimensionError
from .kernel import _brmerge_rows, max_row_nnz

jit = numba.jit(nopython=True, cache=True, nogil=True)

PARALLEL_SCAN_MIN = 1 << 16
HASH_MIN_CAPACITY = 16
HASH_MULT = np.uint64(0x9E3779B97F4A7C15)


def default_threads() -> int:
    n = os.cpu_count() or 1
    # Leave a few hardware threads to the OS once the machine is big enough.
    return max(1, n - max(1, n // 8)) if n > 2 else n


class ForkJoin:
    """Runs ``fn(lo, hi)`` for each range of a partition and waits for all."""

    def __init__(self, p: int):
        if p < 1:
            raise ValueError("thread count must be >= 1")
        self.p = p
        self._pool = ThreadPoolExecutor(p) if p > 1 else None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()

    def run(self, bounds, fn):
        ranges = [(int(bounds[t]), int(bounds[t + 1])) for t in range(len(bounds) - 1)]
        ranges = [r for r in ranges if r[1] > r[0]]
        if self._pool is None or len(ranges) <= 1:
            for lo, hi in ranges:
                fn(lo, hi)
            return
        for f in [self._pool.submit(fn, lo, hi) for lo, hi in ranges]:
            f.result()


def even_bounds(m: int, p: int) -> np.ndarray:
    return np.array([m * t // p for t in range(p + 1)], dtype=np.int64)


@dataclass(frozen=True)
class RowPartition:
    boundaries: np.ndarray

    @property
    def p(self) -> int:
        return len(self.boundaries) - 1

    def ranges(self) -> list[tuple[int, int]]:
        b = self.boundaries
        return [(int(b[t]), int(b[t + 1])) for t in range(self.p)]


# --- step kernels ------------------------------------------------------------


@jit
def _row_nprod_range(a_rpt, a_col, b_rpt, lo, hi, out):
    for i in range(lo, hi):
        s = 0
        for p in range(a_rpt[i], a_rpt[i + 1]):
            k = a_col[p]
            s += b_rpt[k + 1] - b_rpt[k]
        out[i] = s


@jit
def _block_sum(x, lo, hi):
    s = 0
    for i in range(lo, hi):
        s += x[i]
    return s


@jit
def _block_scan(x, lo, hi, base, out):
    s = base
    for i in range(lo, hi):
        s += x[i]
        out[i + 1] = s


def prefix_sum(x: np.ndarray, fj: ForkJoin | None = None) -> np.ndarray:
    """Exclusive scan of ``x`` as an array of len(x)+1 offsets."""
    m = len(x)
    out = np.zeros(m + 1, dtype=np.int64)
    if fj is None or fj.p == 1 or m < PARALLEL_SCAN_MIN:
        np.cumsum(x, out=out[1:])
        return out
    bounds = even_bounds(m, fj.p)
    sums = np.zeros(fj.p, dtype=np.int64)

    def local(lo, hi):
        sums[np.searchsorted(bounds, lo, side="right") - 1] = _block_sum(x, lo, hi)

    fj.run(bounds, local)
    base = np.concatenate([[0], np.cumsum(sums)])
    fj.run(bounds, lambda lo, hi: _block_scan(x, lo, hi, base[np.searchsorted(bounds, lo, side="right") - 1], out))
    return out


@jit
def _next_pow2(n):
    c = HASH_MIN_CAPACITY
    bits = 4
    while c < n:
        c *= 2
        bits += 1
    return c, bits


@jit
def _hash_slot(key, shift):
    return np.int64((np.uint64(key) * HASH_MULT) >> np.uint64(shift))


@jit
def _symbolic_range(a_rpt, a_col, b_rpt, b_col, lo, hi, row_nprod, out):
    biggest = 0
    for i in range(lo, hi):
        biggest = max(biggest, row_nprod[i])
    cap_max, _ = _next_pow2(biggest)
    table = np.full(cap_max, -1, dtype=np.int64)
    touched = np.empty(max(biggest, 1), dtype=np.int64)
    for i in range(lo, hi):
        if row_nprod[i] == 0:
            out[i] = 0
            continue
        cap, bits = _next_pow2(row_nprod[i])
        mask = cap - 1
        shift = 64 - bits
        occ = 0
        for p in range(a_rpt[i], a_rpt[i + 1]):
            k = a_col[p]
            for q in range(b_rpt[k], b_rpt[k + 1]):
                key = b_col[q]
                h = _hash_slot(key, shift)
                while True:
                    cur = table[h]
                    if cur == key:
                        break
                    if cur == -1:
                        table[h] = key
                        touched[occ] = h
                        occ += 1
                        break
                    h = (h + 1) & mask
        out[i] = occ
        for t in range(occ):
            table[touched[t]] = -1


@jit
def _copy_rows(lo, hi, src_off, src_col, src_val, row_size, dst_off, dst_col, dst_val):
    for i in range(lo, hi):
        n = row_size[i]
        s = src_off[i]
        d = dst_off[i]
        dst_col[d:d + n] = src_col[s:s + n]
        dst_val[d:d + n] = src_val[s:s + n]


# --- public operations -------------------------------------------------------


def _check_dims(a: CsrMatrix, b: CsrMatrix):
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")


def _row_nprod(a, b, fj: ForkJoin) -> np.ndarray:
    out = np.zeros(a.rows, dtype=np.int64)
    fj.run(even_bounds(a.rows, fj.p), lambda lo, hi: _row_nprod_range(a.rpt, a.col, b.rpt, lo, hi, out))
    return out


def row_nprod(a: CsrMatrix, b: CsrMatrix, p: int = 1) -> np.ndarray:
    """Intermediate products per output row, sum of nnz(B[k,:]) over A[i,:]."""
    _check_dims(a, b)
    with ForkJoin(p) as fj:
        return _row_nprod(a, b, fj)


def balance_by_nprod(row_nprod: np.ndarray, p: int) -> RowPartition:
    """Split rows into ``p`` contiguous groups of roughly equal nprod.

    Boundary ``t`` sits just past the first row whose running nprod reaches
    ``t * total / p``. All-zero work falls back to an even row split.
    """
    if p < 1:
        raise ValueError("thread count must be >= 1")
    w = np.asarray(row_nprod, dtype=np.int64)
    m = len(w)
    total = int(w.sum())
    if total == 0:
        return RowPartition(even_bounds(m, p))
    # Integer comparison: running*p >= t*total avoids fractional targets.
    scaled = np.cumsum(w) * p
    targets = np.arange(1, p, dtype=np.int64) * total
    inner = np.searchsorted(scaled, targets, side="left") + 1
    bounds = np.concatenate([[0], np.minimum(inner, m), [m]]).astype(np.int64)
    return RowPartition(np.maximum.accumulate(bounds))


def _symbolic(a, b, part: RowPartition, nprod, fj: ForkJoin) -> np.ndarray:
    out = np.zeros(a.rows, dtype=np.int64)
    fj.run(part.boundaries, lambda lo, hi: _symbolic_range(a.rpt, a.col, b.rpt, b.col, lo, hi, nprod, out))
    return out


def symbolic_row_nnz(a: CsrMatrix, b: CsrMatrix, partition: RowPartition | None = None,
                     nprod: np.ndarray | None = None) -> np.ndarray:
    """Exact nnz of each output row, from column indices only."""
    _check_dims(a, b)
    if nprod is None:
        nprod = row_nprod(a, b)
    if partition is None:
        partition = RowPartition(np.array([0, a.rows], dtype=np.int64))
    with ForkJoin(partition.p) as fj:
        return _symbolic(a, b, partition, nprod, fj)


def _numeric_call(kernel, a, b, nprod, max_nprod, max_nnz_a, out_off, out_col, out_val, row_size):
    def fn(lo, hi):
        kernel(a.rpt, a.col, a.val, b.rpt, b.col, b.val, lo, hi, nprod,
               max_nprod, max_nnz_a, out_off, out_col, out_val, row_size)
    return fn


def run_upper(a: CsrMatrix, b: CsrMatrix, p: int, kernel) -> CsrMatrix:
    """Upper-bound allocation pipeline with a pluggable row accumulator."""
    _check_dims(a, b)
    with ForkJoin(p) as fj:
        # Step 1: nprod per row (row-balanced) and its prefix sum.
        nprod = _row_nprod(a, b, fj)
        nprod_off = prefix_sum(nprod, fj)
        # Step 2: nprod-balanced partition.
        part = balance_by_nprod(nprod, p)
        # Step 3: one temporary block, carved per thread at nprod offsets.
        total = int(nprod_off[-1])
        cbar_col = np.empty(total, dtype=np.int64)
        cbar_val = np.empty(total)
        # Step 4: accumulate each row into its slot of the temporary block.
        row_size = np.zeros(a.rows, dtype=np.int64)
        max_nprod = int(nprod.max()) if a.rows else 0
        fj.run(part.boundaries, _numeric_call(kernel, a, b, nprod, max_nprod, max_row_nnz(a),
                                              nprod_off, cbar_col, cbar_val, row_size))
        # Step 5: row sizes to offsets, final arrays.
        rpt = prefix_sum(row_size, fj)
        nnz = int(rpt[-1])
        col = np.empty(nnz, dtype=np.int64)
        val = np.empty(nnz)
        # Step 6: compact into CSR (nprod-balanced).
        fj.run(part.boundaries,
               lambda lo, hi: _copy_rows(lo, hi, nprod_off, cbar_col, cbar_val, row_size, rpt, col, val))
    return CsrMatrix(a.rows, b.cols, rpt, col, val)


def run_precise(a: CsrMatrix, b: CsrMatrix, p: int, kernel) -> CsrMatrix:
    """Precise allocation pipeline with a pluggable row accumulator."""
    _check_dims(a, b)
    with ForkJoin(p) as fj:
        # Step 1: nprod per row, used for balancing and hash-table sizing.
        nprod = _row_nprod(a, b, fj)
        # Step 2: nprod-balanced partition.
        part = balance_by_nprod(nprod, p)
        # Step 3: symbolic phase.
        row_size = _symbolic(a, b, part, nprod, fj)
        # Step 4: offsets and exact allocation.
        rpt = prefix_sum(row_size, fj)
        nnz = int(rpt[-1])
        col = np.empty(nnz, dtype=np.int64)
        val = np.empty(nnz)
        # Step 5: numeric phase writes straight into the final arrays.
        written = np.zeros(a.rows, dtype=np.int64)
        max_nprod = int(nprod.max()) if a.rows else 0
        fj.run(part.boundaries, _numeric_call(kernel, a, b, nprod, max_nprod, max_row_nnz(a),
                                              rpt, col, val, written))
    if not np.array_equal(written, row_size):
        bad = int(np.flatnonzero(written != row_size)[0])
        raise RuntimeError(f"row {bad}: symbolic size {row_size[bad]} != numeric size {written[bad]}")
    return CsrMatrix(a.rows, b.cols, rpt, col, val)


def spgemm_upper(a: CsrMatrix, b: CsrMatrix, p: int = 1) -> CsrMatrix:
    return run_upper(a, b, p, _brmerge_rows)


def spgemm_precise(a: CsrMatrix, b: CsrMatrix, p: int = 1) -> CsrMatrix:
    return run_precise(a, b, p, _brmerge_rows)


def compression_ratio(nprod_total: int, nnz_c: int) -> float:
    if nnz_c <= 0:
        raise ZeroDivisionError("compression ratio undefined for an empty product")
    return nprod_total / nnz_c
