"""Parallel CPU SpGEMM built on binary row merging (BRMerge)."""

from .baselines import spgemm_hash, spgemm_heap
from .csr import (
    CsrMatrix,
    TripletList,
    csr_from_triplets,
    matrices_equal,
    oracle_spgemm,
    validate,
)
from .kernel import PingPongWorkspace, brmerge_row, merge_work_model
from .mmio import load_csr, read_matrix_market
from .pipelines import (
    balance_by_nprod,
    compression_ratio,
    row_nprod,
    spgemm_precise,
    spgemm_upper,
    symbolic_row_nnz,
)
from .randmat import RandomMatrixSpec, generate_random_csr

__all__ = [
    "CsrMatrix", "TripletList", "csr_from_triplets", "matrices_equal", "oracle_spgemm", "validate",
    "PingPongWorkspace", "brmerge_row", "merge_work_model", "load_csr", "read_matrix_market",
    "balance_by_nprod", "compression_ratio", "row_nprod", "spgemm_precise", "spgemm_upper",
    "symbolic_row_nnz", "spgemm_hash", "spgemm_heap", "RandomMatrixSpec", "generate_random_csr",
]
