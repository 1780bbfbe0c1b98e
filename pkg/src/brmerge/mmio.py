"""Matrix Market (coordinate) reader and writer."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .csr import INDEX, VALUE, CsrMatrix, TripletList, csr_from_arrays

FIELDS = ("real", "integer", "pattern")
SYMMETRIES = ("general", "symmetric")


class MatrixMarketError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _parse_header(line: str) -> tuple[str, str]:
    parts = line.strip().lower().split()
    if len(parts) != 5 or parts[0] != "%%matrixmarket" or parts[1] != "matrix":
        raise MatrixMarketError(f"malformed header {line.strip()!r}", 1)
    fmt, fld, sym = parts[2:]
    if fmt != "coordinate":
        raise MatrixMarketError(f"unsupported format {fmt!r} (only coordinate)", 1)
    if fld not in FIELDS:
        raise MatrixMarketError(f"unsupported field {fld!r}", 1)
    if sym not in SYMMETRIES:
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", 1)
    return fld, sym


def _scan_entries(lines, first_lineno, rows, cols, ncols_expected, nnz):
    """Slow path: parse line by line so errors carry a line number."""
    r = np.empty(nnz, INDEX)
    c = np.empty(nnz, INDEX)
    v = np.ones(nnz, VALUE)
    k = 0
    for lineno, line in enumerate(lines, start=first_lineno):
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if len(parts) != ncols_expected:
            raise MatrixMarketError(f"expected {ncols_expected} fields, got {len(parts)}", lineno)
        if k >= nnz:
            raise MatrixMarketError(f"more entries than the declared {nnz}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
            if ncols_expected == 3:
                v[k] = float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"cannot parse entry {s!r}", lineno) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise MatrixMarketError(f"index ({i}, {j}) outside {rows}x{cols}", lineno)
        r[k], c[k] = i - 1, j - 1
        k += 1
    if k != nnz:
        raise MatrixMarketError(f"declared {nnz} entries, found {k}")
    return r, c, v


def read_matrix_market_arrays(path) -> tuple[int, int, np.ndarray, np.ndarray, np.ndarray]:
    """Read a coordinate file into 0-based (rows, cols, r, c, v) arrays.

    Symmetric files come back already expanded.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    fld, sym = _parse_header(lines[0])
    lineno = 1
    while lineno < len(lines) and (not lines[lineno].strip() or lines[lineno].lstrip().startswith("%")):
        lineno += 1
    if lineno >= len(lines):
        raise MatrixMarketError("missing size line", lineno + 1)
    try:
        rows, cols, nnz = (int(x) for x in lines[lineno].split())
    except ValueError:
        raise MatrixMarketError(f"malformed size line {lines[lineno].strip()!r}", lineno + 1) from None
    body = lines[lineno + 1:]
    ncols_expected = 2 if fld == "pattern" else 3

    data = None
    if nnz and not any(l.lstrip().startswith("%") for l in body):
        try:
            data = np.loadtxt(io.StringIO("\n".join(body)), ndmin=2)
        except ValueError:
            data = None
        if data is not None and data.shape != (nnz, ncols_expected):
            data = None
    if data is not None:
        r = data[:, 0].astype(INDEX) - 1
        c = data[:, 1].astype(INDEX) - 1
        v = data[:, 2].astype(VALUE) if ncols_expected == 3 else np.ones(nnz, VALUE)
        if (np.any(data[:, :2] != np.floor(data[:, :2])) or r.min() < 0 or c.min() < 0
                or r.max() >= rows or c.max() >= cols):
            # Defer to the slow path for the exact failing line.
            r, c, v = _scan_entries(body, lineno + 2, rows, cols, ncols_expected, nnz)
    else:
        r, c, v = _scan_entries(body, lineno + 2, rows, cols, ncols_expected, nnz)

    if sym == "symmetric":
        off = r != c
        r, c, v = np.concatenate([r, c[off]]), np.concatenate([c, r[off]]), np.concatenate([v, v[off]])
    return rows, cols, r, c, v


def read_matrix_market(path) -> TripletList:
    rows, cols, r, c, v = read_matrix_market_arrays(path)
    return TripletList(rows, cols, list(zip(r.tolist(), c.tolist(), v.tolist())))


def load_csr(path) -> CsrMatrix:
    """Read a Matrix Market file straight into canonical CSR."""
    rows, cols, r, c, v = read_matrix_market_arrays(path)
    return csr_from_arrays(rows, cols, r, c, v)


def write_matrix_market(path, m: CsrMatrix, *, pattern: bool = False, comment: str | None = None):
    fld = "pattern" if pattern else "real"
    with open(path, "w") as f:
        f.write(f"%%MatrixMarket matrix coordinate {fld} general\n")
        if comment:
            for line in comment.splitlines():
                f.write(f"% {line}\n")
        f.write(f"{m.rows} {m.cols} {m.nnz}\n")
        rows = np.repeat(np.arange(m.rows), m.row_lengths())
        for i, j, x in zip(rows.tolist(), m.col.tolist(), m.val.tolist()):
            if pattern:
                f.write(f"{i + 1} {j + 1}\n")
            else:
                f.write(f"{i + 1} {j + 1} {x!r}\n")
