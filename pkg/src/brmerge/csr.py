"""CSR matrices, triplet staging, validation and the dense-accumulator oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numba
import numpy as np

INDEX = np.int64
VALUE = np.float64


class ConstructionError(ValueError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    """Compressed sparse row matrix.

    ``rpt`` holds ``rows + 1`` offsets into ``col``/``val``. Arrays are made
    read-only on construction so one instance can be shared across threads.
    """

    rows: int
    cols: int
    rpt: np.ndarray
    col: np.ndarray
    val: np.ndarray

    def __post_init__(self):
        for name, dtype in (("rpt", INDEX), ("col", INDEX), ("val", VALUE)):
            arr = np.ascontiguousarray(getattr(self, name), dtype=dtype)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return int(self.rpt[-1]) if len(self.rpt) else 0

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.rpt[i], self.rpt[i + 1]
        return self.col[lo:hi], self.val[lo:hi]

    def row_lengths(self) -> np.ndarray:
        return np.diff(self.rpt)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        rows = np.repeat(np.arange(self.rows), self.row_lengths())
        np.add.at(out, (rows, self.col), self.val)
        return out

    def to_triplets(self) -> TripletList:
        rows = np.repeat(np.arange(self.rows), self.row_lengths())
        entries = list(zip(rows.tolist(), self.col.tolist(), self.val.tolist()))
        return TripletList(self.rows, self.cols, entries)

    @classmethod
    def empty(cls, rows: int, cols: int) -> CsrMatrix:
        return cls(rows, cols, np.zeros(rows + 1, INDEX), np.zeros(0, INDEX), np.zeros(0, VALUE))

    @classmethod
    def identity(cls, n: int) -> CsrMatrix:
        return cls(n, n, np.arange(n + 1), np.arange(n), np.ones(n))

    @classmethod
    def from_dense(cls, dense) -> CsrMatrix:
        dense = np.asarray(dense, dtype=VALUE)
        r, c = np.nonzero(dense)
        return csr_from_arrays(dense.shape[0], dense.shape[1], r, c, dense[r, c])

    def __repr__(self):
        return f"CsrMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


@dataclass
class TripletList:
    rows: int
    cols: int
    entries: list[tuple[int, int, float]] = field(default_factory=list)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.entries:
            return np.zeros(0, INDEX), np.zeros(0, INDEX), np.zeros(0, VALUE)
        r, c, v = zip(*self.entries)
        return np.array(r, INDEX), np.array(c, INDEX), np.array(v, VALUE)


def csr_from_arrays(rows: int, cols: int, r, c, v) -> CsrMatrix:
    """Build a canonical CSR matrix from coordinate arrays, summing duplicates."""
    r = np.asarray(r, dtype=INDEX)
    c = np.asarray(c, dtype=INDEX)
    v = np.asarray(v, dtype=VALUE)
    if not (len(r) == len(c) == len(v)):
        raise ConstructionError("coordinate arrays differ in length")
    if len(r):
        bad = (r < 0) | (r >= rows) | (c < 0) | (c >= cols)
        if bad.any():
            k = int(np.argmax(bad))
            raise ConstructionError(
                f"entry {k} at ({r[k]}, {c[k]}) is outside a {rows}x{cols} matrix"
            )
    order = np.lexsort((c, r))
    r, c, v = r[order], c[order], v[order]
    if len(r):
        first = np.ones(len(r), dtype=bool)
        first[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        starts = np.flatnonzero(first)
        v = np.add.reduceat(v, starts)
        r, c = r[starts], c[starts]
    rpt = np.zeros(rows + 1, INDEX)
    np.cumsum(np.bincount(r, minlength=rows), out=rpt[1:])
    return CsrMatrix(rows, cols, rpt, c, v)


def csr_from_triplets(t: TripletList) -> CsrMatrix:
    return csr_from_arrays(t.rows, t.cols, *t.arrays())


class Violation(NamedTuple):
    kind: str
    row: int
    detail: str


def validate(m: CsrMatrix) -> list[Violation]:
    """Return one violation per broken CSR invariant (empty list when valid)."""
    out = []
    rpt, col, val = np.asarray(m.rpt), np.asarray(m.col), np.asarray(m.val)
    if len(rpt) != m.rows + 1:
        out.append(Violation("rpt length", -1, f"len(rpt)={len(rpt)}, expected {m.rows + 1}"))
        return out
    if rpt[0] != 0:
        out.append(Violation("rpt start", 0, f"rpt[0]={rpt[0]}"))
    if len(col) != len(val):
        out.append(Violation("col/val length", -1, f"{len(col)} != {len(val)}"))
    if rpt[-1] != len(col):
        out.append(Violation("offset mismatch", m.rows, f"rpt[M]={rpt[-1]}, len(col)={len(col)}"))
    dec = np.flatnonzero(np.diff(rpt) < 0)
    for i in dec:
        out.append(Violation("decreasing rpt", int(i), f"rpt[{i}]={rpt[i]} > rpt[{i + 1}]={rpt[i + 1]}"))
    if out:
        # Row-level checks below assume sane offsets.
        return out
    bad = np.flatnonzero((col < 0) | (col >= m.cols))
    if len(bad):
        rows = np.searchsorted(rpt, bad, side="right") - 1
        for i in np.unique(rows):
            out.append(Violation("column out of range", int(i), f"columns must lie in [0, {m.cols})"))
    if len(col) > 1:
        # A step between neighbours is legal only across a row boundary.
        step_bad = col[1:] <= col[:-1]
        boundary = np.zeros(len(col) - 1, dtype=bool)
        ends = rpt[1:-1] - 1
        ends = ends[(ends >= 0) & (ends < len(col) - 1)]
        boundary[ends] = True
        idx = np.flatnonzero(step_bad & ~boundary)
        rows = np.searchsorted(rpt, idx, side="right") - 1
        for i in np.unique(rows):
            out.append(Violation("unsorted row", int(i), "columns not strictly increasing"))
    return out


@numba.jit(nopython=True, cache=True, nogil=True)
def _oracle_kernel(a_rpt, a_col, a_val, b_rpt, b_col, b_val, n):
    m = len(a_rpt) - 1
    dense = np.zeros(n)
    seen = np.zeros(n, dtype=np.bool_)
    rpt = np.zeros(m + 1, dtype=np.int64)
    cap = 16
    col = np.empty(cap, dtype=np.int64)
    val = np.empty(cap)
    touched = np.empty(n, dtype=np.int64)
    nnz = 0
    for i in range(m):
        nt = 0
        for p in range(a_rpt[i], a_rpt[i + 1]):
            k = a_col[p]
            for q in range(b_rpt[k], b_rpt[k + 1]):
                j = b_col[q]
                if not seen[j]:
                    seen[j] = True
                    touched[nt] = j
                    nt += 1
                dense[j] += a_val[p] * b_val[q]
        cols_i = np.sort(touched[:nt])
        if nnz + nt > cap:
            while nnz + nt > cap:
                cap *= 2
            col2 = np.empty(cap, dtype=np.int64)
            val2 = np.empty(cap)
            col2[:nnz] = col[:nnz]
            val2[:nnz] = val[:nnz]
            col, val = col2, val2
        for t in range(nt):
            j = cols_i[t]
            col[nnz] = j
            val[nnz] = dense[j]
            nnz += 1
            dense[j] = 0.0
            seen[j] = False
        rpt[i + 1] = nnz
    return rpt, col[:nnz].copy(), val[:nnz].copy()


def oracle_spgemm(a: CsrMatrix, b: CsrMatrix) -> CsrMatrix:
    """Reference product using a length-N dense accumulator per output row.

    Entries that cancel to 0.0 stay in the pattern, matching the merge-based
    accumulators, which combine by column index only.
    """
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    rpt, col, val = _oracle_kernel(a.rpt, a.col, a.val, b.rpt, b.col, b.val, b.cols)
    return CsrMatrix(a.rows, b.cols, rpt, col, val)


def matrices_equal(a: CsrMatrix, b: CsrMatrix, tol: float = 1e-12) -> bool:
    if a.shape != b.shape:
        return False
    if not (np.array_equal(a.rpt, b.rpt) and np.array_equal(a.col, b.col)):
        return False
    return values_close(a.val, b.val, tol)


def values_close(x, y, tol: float) -> bool:
    """Relative comparison with an absolute floor for values near zero.

    The floor is a few ulps at unit scale, so values a single rounding step
    apart compare equal even under ``tol`` far below machine epsilon.
    """
    x = np.asarray(x, dtype=VALUE)
    y = np.asarray(y, dtype=VALUE)
    if x.shape != y.shape:
        return False
    scale = np.maximum(np.abs(x), np.abs(y))
    ulp = np.spacing(scale)
    bound = np.maximum(tol * scale, np.maximum(4 * ulp, tol))
    return bool(np.all(np.abs(x - y) <= bound))


def first_difference(a: CsrMatrix, b: CsrMatrix, tol: float = 1e-12) -> str | None:
    """Describe the first row where two matrices disagree, or None."""
    if a.shape != b.shape:
        return f"shape {a.shape} != {b.shape}"
    for i in range(a.rows):
        ca, va = a.row(i)
        cb, vb = b.row(i)
        if not np.array_equal(ca, cb):
            return f"row {i}: pattern differs ({len(ca)} vs {len(cb)} entries)"
        if not values_close(va, vb, tol):
            return f"row {i}: values differ beyond tol={tol:g}"
    return None
