"""Binary row merging through a ping-pong workspace.

One output row is produced in two phases. The multiplying phase writes every
scaled row ``A[i,k] * B[k,:]`` back to back into one side of the workspace,
recording list boundaries in that side's offset array. The accumulating phase
then merges the lists pairwise, round after round, reading from the source
side and writing to the destination side, and swaps the roles after each
round. The row ends up on whichever side was written last.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .csr import CsrMatrix

jit = numba.jit(nopython=True, cache=True, nogil=True)


@jit
def _multiply_row(a_rpt, a_col, a_val, b_rpt, b_col, b_val, i, dst_col, dst_val, dst_off):
    n = 0
    lists = 0
    dst_off[0] = 0
    for p in range(a_rpt[i], a_rpt[i + 1]):
        k = a_col[p]
        aik = a_val[p]
        for q in range(b_rpt[k], b_rpt[k + 1]):
            dst_col[n] = b_col[q]
            dst_val[n] = aik * b_val[q]
            n += 1
        lists += 1
        dst_off[lists] = n
    return lists


@jit
def _merge_into(lc, lv, rc, rv, oc, ov):
    nl = len(lc)
    nr = len(rc)
    x = 0
    y = 0
    n = 0
    while x < nl and y < nr:
        cl = lc[x]
        cr = rc[y]
        if cl < cr:
            oc[n] = cl
            ov[n] = lv[x]
            x += 1
        elif cr < cl:
            oc[n] = cr
            ov[n] = rv[y]
            y += 1
        else:
            oc[n] = cl
            ov[n] = lv[x] + rv[y]
            x += 1
            y += 1
        n += 1
    while x < nl:
        oc[n] = lc[x]
        ov[n] = lv[x]
        x += 1
        n += 1
    while y < nr:
        oc[n] = rc[y]
        ov[n] = rv[y]
        y += 1
        n += 1
    return n


@jit
def _merge_round(src_col, src_val, src_off, num_list, dst_col, dst_val, dst_off):
    """One pass over the source lists; returns the destination list count."""
    out = 0
    pos = 0
    dst_off[0] = 0
    t = 0
    while t < num_list:
        if num_list - t >= 2:
            l0, l1 = src_off[t], src_off[t + 1]
            r1 = src_off[t + 2]
            pos += _merge_into(src_col[l0:l1], src_val[l0:l1], src_col[l1:r1], src_val[l1:r1],
                               dst_col[pos:], dst_val[pos:])
            t += 2
        else:
            l0, l1 = src_off[t], src_off[t + 1]
            m = l1 - l0
            dst_col[pos:pos + m] = src_col[l0:l1]
            dst_val[pos:pos + m] = src_val[l0:l1]
            pos += m
            t += 1
        out += 1
        dst_off[out] = pos
    return out


@jit
def _accumulate(cols, vals, offs, src, num_list):
    """Merge until one list is left. Returns (side, length, rounds)."""
    rounds = 0
    while num_list > 1:
        dst = 1 - src
        num_list = _merge_round(cols[src], vals[src], offs[src], num_list, cols[dst], vals[dst], offs[dst])
        src = dst
        rounds += 1
    if num_list == 0:
        return src, 0, rounds
    return src, offs[src, 1], rounds


@jit
def _brmerge_row(a_rpt, a_col, a_val, b_rpt, b_col, b_val, i, cols, vals, offs):
    num_list = _multiply_row(a_rpt, a_col, a_val, b_rpt, b_col, b_val, i, cols[0], vals[0], offs[0])
    return _accumulate(cols, vals, offs, 0, num_list)


@jit
def _brmerge_rows(a_rpt, a_col, a_val, b_rpt, b_col, b_val, lo, hi, row_nprod,
                  max_row_nprod, max_row_nnz_a, out_off, out_col, out_val, row_size):
    """Numeric loop over rows [lo, hi) with one workspace for the whole range.

    Row i is written at ``out_off[i]``; its length goes to ``row_size[i]``.
    """
    cols = np.empty((2, max(max_row_nprod, 1)), dtype=np.int64)
    vals = np.empty((2, max(max_row_nprod, 1)))
    offs = np.empty((2, max_row_nnz_a + 1), dtype=np.int64)
    for i in range(lo, hi):
        if row_nprod[i] == 0:
            row_size[i] = 0
            continue
        side, n, _ = _brmerge_row(a_rpt, a_col, a_val, b_rpt, b_col, b_val, i, cols, vals, offs)
        o = out_off[i]
        out_col[o:o + n] = cols[side, :n]
        out_val[o:o + n] = vals[side, :n]
        row_size[i] = n


# --- row-level API -----------------------------------------------------------


def max_row_nnz(a: CsrMatrix) -> int:
    return int(np.max(a.row_lengths())) if a.rows else 0


@dataclass
class PingPongWorkspace:
    """Two (column, value) buffers and two list-offset arrays.

    ``src`` names the side currently holding the live lists; the other side
    is the destination of the next merge round.
    """

    max_row_nprod: int
    max_row_nnz_a: int
    cols: np.ndarray = field(init=False, repr=False)
    vals: np.ndarray = field(init=False, repr=False)
    offs: np.ndarray = field(init=False, repr=False)
    src: int = 0

    def __post_init__(self):
        cap = max(self.max_row_nprod, 1)
        self.cols = np.zeros((2, cap), dtype=np.int64)
        self.vals = np.zeros((2, cap))
        self.offs = np.zeros((2, self.max_row_nnz_a + 1), dtype=np.int64)

    @classmethod
    def for_product(cls, a: CsrMatrix, b: CsrMatrix) -> PingPongWorkspace:
        from .pipelines import row_nprod
        nprod = row_nprod(a, b)
        return cls(int(nprod.max()) if len(nprod) else 0, max_row_nnz(a))

    @property
    def dst(self) -> int:
        return 1 - self.src

    buf_col_a = property(lambda self: self.cols[0])
    buf_col_b = property(lambda self: self.cols[1])
    buf_val_a = property(lambda self: self.vals[0])
    buf_val_b = property(lambda self: self.vals[1])
    offsets_a = property(lambda self: self.offs[0])
    offsets_b = property(lambda self: self.offs[1])


@dataclass
class IntermediateListSet:
    ws: PingPongWorkspace
    side: int
    num_list: int

    @property
    def offsets(self) -> np.ndarray:
        return self.ws.offs[self.side, :self.num_list + 1]

    @property
    def total(self) -> int:
        return int(self.offsets[-1])

    def lists(self) -> list[tuple[np.ndarray, np.ndarray]]:
        off = self.offsets
        c, v = self.ws.cols[self.side], self.ws.vals[self.side]
        return [(c[off[t]:off[t + 1]].copy(), v[off[t]:off[t + 1]].copy()) for t in range(self.num_list)]


@dataclass
class RowView:
    col: np.ndarray
    val: np.ndarray
    rounds: int
    live_totals: list[int] | None = None

    def __len__(self):
        return len(self.col)


def multiply_row(a: CsrMatrix, b: CsrMatrix, i: int, ws: PingPongWorkspace) -> IntermediateListSet:
    lo, hi = a.rpt[i], a.rpt[i + 1]
    if hi - lo > ws.max_row_nnz_a:
        raise ValueError(f"row {i} has {hi - lo} nonzeros, workspace holds {ws.max_row_nnz_a} lists")
    ks = a.col[lo:hi]
    need = int(np.sum(b.rpt[ks + 1] - b.rpt[ks]))
    if need > ws.cols.shape[1]:
        raise ValueError(f"row {i} needs {need} slots, workspace has {ws.cols.shape[1]}")
    n = _multiply_row(a.rpt, a.col, a.val, b.rpt, b.col, b.val, i, ws.cols[0], ws.vals[0], ws.offs[0])
    ws.src = 0
    return IntermediateListSet(ws, 0, n)


def merge_two_lists(left_col, left_val, right_col, right_val, out_col, out_val) -> int:
    """Merge two strictly increasing (col, val) lists, summing equal columns.

    Writes into ``out_col``/``out_val`` and returns the merged length.
    """
    if len(out_col) < len(left_col) + len(right_col):
        raise ValueError("output span too small")
    return _merge_into(np.asarray(left_col, np.int64), np.asarray(left_val, np.float64),
                       np.asarray(right_col, np.int64), np.asarray(right_val, np.float64),
                       out_col, out_val)


def _strictly_increasing(c: np.ndarray) -> bool:
    return bool(np.all(c[1:] > c[:-1]))


def accumulate_row(ws: PingPongWorkspace, lists: IntermediateListSet, *, debug: bool = False) -> RowView:
    """Merge the intermediate lists of one row into a single sorted row.

    With ``debug=True`` rounds are driven from Python so that every round can
    be checked: each live list must stay strictly increasing and the live
    element total must never grow. The per-round totals are returned in
    ``live_totals`` (first entry is the multiplying-phase total).
    """
    if lists.ws is not ws or lists.side != ws.src:
        raise ValueError("lists must live on the workspace's source side")
    if not debug:
        side, n, rounds = _accumulate(ws.cols, ws.vals, ws.offs, ws.src, lists.num_list)
        ws.src = side
        return RowView(ws.cols[side, :n], ws.vals[side, :n], rounds)

    totals = [lists.total]
    num_list = lists.num_list
    rounds = 0
    while num_list > 1:
        s, d = ws.src, ws.dst
        num_list = _merge_round(ws.cols[s], ws.vals[s], ws.offs[s], num_list, ws.cols[d], ws.vals[d], ws.offs[d])
        ws.src = d
        rounds += 1
        live = IntermediateListSet(ws, d, num_list)
        for c, _ in live.lists():
            assert _strictly_increasing(c), f"round {rounds}: list not strictly increasing"
        assert live.total <= totals[-1], f"round {rounds}: live total grew {totals[-1]} -> {live.total}"
        totals.append(live.total)
    n = int(ws.offs[ws.src, 1]) if num_list else 0
    return RowView(ws.cols[ws.src, :n], ws.vals[ws.src, :n], rounds, totals)


def brmerge_row(a: CsrMatrix, b: CsrMatrix, i: int, ws: PingPongWorkspace, *, debug: bool = False) -> RowView:
    return accumulate_row(ws, multiply_row(a, b, i, ws), debug=debug)


def merge_work_model(list_lengths) -> tuple[int, int]:
    """Analytic merge cost: (rounds, upper bound on elements moved).

    Every round moves at most the current live total, which never exceeds the
    initial total, hence ``rounds * sum(lengths)``.
    """
    lengths = list(list_lengths)
    n = len(lengths)
    rounds = (n - 1).bit_length() if n > 1 else 0
    return rounds, rounds * int(sum(lengths))
