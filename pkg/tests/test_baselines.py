import numpy as np
import pytest

from brmerge.baselines import (
    MergeHeap,
    NumericHashTable,
    hash_accumulate_row,
    heap_accumulate_row,
    spgemm_hash,
    spgemm_heap,
)
from brmerge.csr import CsrMatrix, csr_from_arrays, matrices_equal, oracle_spgemm, validate, values_close
from brmerge.kernel import merge_two_lists
from brmerge.pipelines import row_nprod, spgemm_precise
from brmerge.randmat import random_square


def out_span(n):
    return np.empty(max(n, 1), dtype=np.int64), np.empty(max(n, 1))


class TestHeapRow:
    def test_single_list(self):
        b = random_square(10, 0.4, 1)
        a = csr_from_arrays(10, 10, [0], [4], [3.0])
        oc, ov = out_span(10)
        n = heap_accumulate_row(a, b, 0, MergeHeap.for_matrix(a), oc, ov)
        c, v = b.row(4)
        assert oc[:n].tolist() == c.tolist()
        assert ov[:n].tolist() == (3.0 * v).tolist()

    def test_two_lists_match_binary_merge(self):
        b = csr_from_arrays(3, 8, [1, 1, 1, 2, 2], [0, 3, 6, 1, 3], [1.0, 2.0, 3.0, 4.0, 5.0])
        a = csr_from_arrays(1, 3, [0, 0], [1, 2], [1.0, 1.0])
        oc, ov = out_span(5)
        n = heap_accumulate_row(a, b, 0, MergeHeap(2), oc, ov)
        mc, mv = out_span(5)
        m = merge_two_lists(*b.row(1), *b.row(2), mc, mv)
        assert oc[:n].tolist() == mc[:m].tolist() == [0, 1, 3, 6]
        assert ov[:n].tolist() == mv[:m].tolist()

    def test_random_50_rows(self):
        a, b = random_square(50, 0.2, 5), random_square(50, 0.2, 6)
        ref = oracle_spgemm(a, b)
        heap = MergeHeap.for_matrix(a)
        oc, ov = out_span(int(row_nprod(a, b).max()))
        for i in range(50):
            n = heap_accumulate_row(a, b, i, heap, oc, ov)
            c, v = ref.row(i)
            assert oc[:n].tolist() == c.tolist()
            assert values_close(ov[:n], v, 1e-12)
            assert heap.peak <= a.rpt[i + 1] - a.rpt[i]

    def test_heap_too_small(self):
        a = random_square(10, 0.6, 2)
        with pytest.raises(ValueError):
            heap_accumulate_row(a, a, 0, MergeHeap(1), *out_span(100))


class TestHashRow:
    def test_empty_row(self):
        a = CsrMatrix.empty(3, 3)
        assert hash_accumulate_row(a, a, 1, NumericHashTable(4), *out_span(1)) == 0

    def test_full_collision(self):
        b = csr_from_arrays(4, 6, [0, 1, 2, 3], [5, 5, 5, 5], [1.0, 2.0, 3.0, 4.0])
        a = csr_from_arrays(1, 4, [0, 0, 0, 0], [0, 1, 2, 3], [1.0, 1.0, 1.0, 1.0])
        table = NumericHashTable(1)
        oc, ov = out_span(4)
        assert hash_accumulate_row(a, b, 0, table, oc, ov) == 1
        assert oc[0] == 5 and ov[0] == 10.0
        assert table.occupancy == 0  # slots cleared after extraction

    def test_capacity_is_power_of_two(self):
        for size in (0, 1, 15, 16, 17, 1000):
            t = NumericHashTable(size)
            assert t.capacity >= max(size, 16)
            assert t.capacity & (t.capacity - 1) == 0

    def test_random_50_rows(self):
        a, b = random_square(50, 0.2, 7), random_square(50, 0.2, 8)
        ref = oracle_spgemm(a, b)
        table = NumericHashTable(50)
        oc, ov = out_span(50)
        for i in range(50):
            n = hash_accumulate_row(a, b, i, table, oc, ov)
            c, v = ref.row(i)
            assert oc[:n].tolist() == c.tolist()
            assert np.all(np.diff(oc[:n]) > 0)
            assert values_close(ov[:n], v, 1e-12)

    def test_table_too_small(self):
        a = random_square(40, 0.9, 3)
        with pytest.raises(ValueError):
            hash_accumulate_row(a, a, 0, NumericHashTable(1), *out_span(2000))


@pytest.mark.parametrize("fn", [spgemm_heap, spgemm_hash])
class TestBaselinePipelines:
    def test_identity(self, fn):
        i = CsrMatrix.identity(6)
        assert matrices_equal(fn(i, i, 2), i, tol=0)

    def test_equals_precise_200(self, fn):
        for seed in range(200):
            a = random_square(4 + seed % 37, 0.01 + (seed % 9) * 0.05, 1000 + seed)
            c = fn(a, a, 1 + seed % 4)
            assert validate(c) == []
            assert matrices_equal(c, spgemm_precise(a, a, 2), tol=1e-12)

    def test_fixtures(self, fn, fixtures):
        for name, a in fixtures.items():
            assert matrices_equal(fn(a, a, 2), oracle_spgemm(a, a), tol=1e-12), name
