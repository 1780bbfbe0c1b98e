"""Heap- and hash-based row accumulators used as comparison baselines.

The heap keeps one cursor per nonzero of ``A[i,:]`` pointing into the
matching row of B, and scales by ``A[i,k]`` only when an element is popped.
So all the B rows an output row needs stay open for the whole merge. The hash
accumulator inserts every product into an open-addressing table, then
extracts and sorts the occupied slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .csr import CsrMatrix
from .kernel import max_row_nnz
from .pipelines import _hash_slot, _next_pow2, run_precise, run_upper

jit = numba.jit(nopython=True, cache=True, nogil=True)


@jit
def _sift_down(key, lid, n, pos):
    while True:
        left = 2 * pos + 1
        if left >= n:
            return
        small = left
        right = left + 1
        if right < n and key[right] < key[left]:
            small = right
        if key[small] >= key[pos]:
            return
        key[pos], key[small] = key[small], key[pos]
        lid[pos], lid[small] = lid[small], lid[pos]
        pos = small


@jit
def _sift_up(key, lid, pos):
    while pos > 0:
        parent = (pos - 1) // 2
        if key[parent] <= key[pos]:
            return
        key[pos], key[parent] = key[parent], key[pos]
        lid[pos], lid[parent] = lid[parent], lid[pos]
        pos = parent


@jit
def _heap_row(a_rpt, a_col, a_val, b_rpt, b_col, b_val, i, key, lid, cur, end, out_col, out_val):
    """Returns (length, largest heap size seen)."""
    n = 0
    for p in range(a_rpt[i], a_rpt[i + 1]):
        k = a_col[p]
        t = p - a_rpt[i]
        cur[t] = b_rpt[k]
        end[t] = b_rpt[k + 1]
        if cur[t] < end[t]:
            key[n] = b_col[cur[t]]
            lid[n] = t
            n += 1
            _sift_up(key, lid, n - 1)
    peak = n
    length = 0
    base = a_rpt[i]
    while n > 0:
        t = lid[0]
        c = key[0]
        v = a_val[base + t] * b_val[cur[t]]
        if length > 0 and out_col[length - 1] == c:
            out_val[length - 1] += v
        else:
            out_col[length] = c
            out_val[length] = v
            length += 1
        cur[t] += 1
        if cur[t] < end[t]:
            key[0] = b_col[cur[t]]
        else:
            n -= 1
            key[0] = key[n]
            lid[0] = lid[n]
        _sift_down(key, lid, n, 0)
    return length, peak


@jit
def _heap_rows(a_rpt, a_col, a_val, b_rpt, b_col, b_val, lo, hi, row_nprod,
               max_row_nprod, max_row_nnz_a, out_off, out_col, out_val, row_size):
    cap = max(max_row_nnz_a, 1)
    key = np.empty(cap, dtype=np.int64)
    lid = np.empty(cap, dtype=np.int64)
    cur = np.empty(cap, dtype=np.int64)
    end = np.empty(cap, dtype=np.int64)
    for i in range(lo, hi):
        if row_nprod[i] == 0:
            row_size[i] = 0
            continue
        o = out_off[i]
        n, _ = _heap_row(a_rpt, a_col, a_val, b_rpt, b_col, b_val, i, key, lid, cur, end,
                         out_col[o:], out_val[o:])
        row_size[i] = n


@jit
def _hash_row(a_rpt, a_col, a_val, b_rpt, b_col, b_val, i, cap, bits, keys, vals, touched, out_col, out_val):
    mask = cap - 1
    shift = 64 - bits
    occ = 0
    for p in range(a_rpt[i], a_rpt[i + 1]):
        k = a_col[p]
        aik = a_val[p]
        for q in range(b_rpt[k], b_rpt[k + 1]):
            key = b_col[q]
            h = _hash_slot(key, shift)
            while True:
                cur = keys[h]
                if cur == key:
                    vals[h] += aik * b_val[q]
                    break
                if cur == -1:
                    keys[h] = key
                    vals[h] = aik * b_val[q]
                    touched[occ] = h
                    occ += 1
                    break
                h = (h + 1) & mask
    slots = touched[:occ]
    order = np.argsort(keys[slots])
    for t in range(occ):
        s = slots[order[t]]
        out_col[t] = keys[s]
        out_val[t] = vals[s]
        keys[s] = -1
    return occ


@jit
def _hash_rows(a_rpt, a_col, a_val, b_rpt, b_col, b_val, lo, hi, row_nprod,
               max_row_nprod, max_row_nnz_a, out_off, out_col, out_val, row_size):
    # Table sized from the output span: the nprod bound under upper-bound
    # allocation, the exact row nnz under precise allocation.
    biggest = 0
    for i in range(lo, hi):
        biggest = max(biggest, out_off[i + 1] - out_off[i])
    cap_max, _ = _next_pow2(biggest + 1)
    keys = np.full(cap_max, -1, dtype=np.int64)
    vals = np.zeros(cap_max)
    touched = np.empty(cap_max, dtype=np.int64)
    for i in range(lo, hi):
        if row_nprod[i] == 0:
            row_size[i] = 0
            continue
        cap, bits = _next_pow2(out_off[i + 1] - out_off[i] + 1)
        o = out_off[i]
        row_size[i] = _hash_row(a_rpt, a_col, a_val, b_rpt, b_col, b_val, i, cap, bits,
                                keys, vals, touched, out_col[o:], out_val[o:])


# --- row-level API -----------------------------------------------------------


@dataclass
class MergeHeap:
    """Binary min-heap of cursors into B rows, keyed by current column."""

    capacity: int
    key: np.ndarray = field(init=False, repr=False)
    lid: np.ndarray = field(init=False, repr=False)
    cur: np.ndarray = field(init=False, repr=False)
    end: np.ndarray = field(init=False, repr=False)
    peak: int = 0

    def __post_init__(self):
        cap = max(self.capacity, 1)
        self.key = np.empty(cap, dtype=np.int64)
        self.lid = np.empty(cap, dtype=np.int64)
        self.cur = np.empty(cap, dtype=np.int64)
        self.end = np.empty(cap, dtype=np.int64)

    @classmethod
    def for_matrix(cls, a: CsrMatrix) -> MergeHeap:
        return cls(max_row_nnz(a))


@dataclass
class NumericHashTable:
    """Open-addressing (column, value) table with power-of-two capacity."""

    min_size: int
    keys: np.ndarray = field(init=False, repr=False)
    vals: np.ndarray = field(init=False, repr=False)
    touched: np.ndarray = field(init=False, repr=False)
    capacity: int = field(init=False)
    bits: int = field(init=False)

    def __post_init__(self):
        self.capacity, self.bits = (int(x) for x in _next_pow2(self.min_size + 1))
        self.keys = np.full(self.capacity, -1, dtype=np.int64)
        self.vals = np.zeros(self.capacity)
        self.touched = np.empty(self.capacity, dtype=np.int64)

    @property
    def occupancy(self) -> int:
        return int(np.count_nonzero(self.keys != -1))


def heap_accumulate_row(a: CsrMatrix, b: CsrMatrix, i: int, heap: MergeHeap, out_col, out_val) -> int:
    if a.rpt[i + 1] - a.rpt[i] > heap.capacity:
        raise ValueError(f"row {i} needs a heap of {a.rpt[i + 1] - a.rpt[i]} cursors")
    n, peak = _heap_row(a.rpt, a.col, a.val, b.rpt, b.col, b.val, i,
                        heap.key, heap.lid, heap.cur, heap.end, out_col, out_val)
    heap.peak = int(peak)
    return int(n)


def hash_accumulate_row(a: CsrMatrix, b: CsrMatrix, i: int, table: NumericHashTable, out_col, out_val) -> int:
    ks = a.col[a.rpt[i]:a.rpt[i + 1]]
    distinct = len(np.unique(np.concatenate([b.col[b.rpt[k]:b.rpt[k + 1]] for k in ks]))) if len(ks) else 0
    if distinct >= table.capacity:
        # Linear probing would never find a free slot.
        raise ValueError(f"row {i} has {distinct} distinct columns, table holds {table.capacity}")
    return int(_hash_row(a.rpt, a.col, a.val, b.rpt, b.col, b.val, i, table.capacity, table.bits,
                         table.keys, table.vals, table.touched, out_col, out_val))


def spgemm_heap(a: CsrMatrix, b: CsrMatrix, p: int = 1) -> CsrMatrix:
    return run_upper(a, b, p, _heap_rows)


def spgemm_hash(a: CsrMatrix, b: CsrMatrix, p: int = 1) -> CsrMatrix:
    return run_precise(a, b, p, _hash_rows)
