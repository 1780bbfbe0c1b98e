"""Seeded random CSR matrices for tests and benchmarks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csr import CsrMatrix, csr_from_arrays


@dataclass(frozen=True)
class RandomMatrixSpec:
    rows: int
    cols: int
    nnz: int
    seed: int = 0

    @classmethod
    def with_density(cls, rows: int, cols: int, density: float, seed: int = 0) -> RandomMatrixSpec:
        return cls(rows, cols, int(round(density * rows * cols)), seed)


def generate_random_csr(spec: RandomMatrixSpec) -> CsrMatrix:
    """Exactly ``spec.nnz`` distinct positions, values uniform in [-1, 1]."""
    total = spec.rows * spec.cols
    if spec.nnz < 0 or spec.nnz > total:
        raise ValueError(f"cannot place {spec.nnz} nonzeros in a {spec.rows}x{spec.cols} matrix")
    rng = np.random.default_rng(spec.seed)
    pos = rng.choice(total, size=spec.nnz, replace=False) if spec.nnz else np.zeros(0, np.int64)
    vals = rng.uniform(-1.0, 1.0, size=spec.nnz)
    return csr_from_arrays(spec.rows, spec.cols, pos // max(spec.cols, 1), pos % max(spec.cols, 1), vals)


def random_square(n: int, density: float, seed: int) -> CsrMatrix:
    return generate_random_csr(RandomMatrixSpec.with_density(n, n, density, seed))


def _with_values(n: int, r, c, seed: int) -> CsrMatrix:
    rng = np.random.default_rng(seed)
    return csr_from_arrays(n, n, r, c, rng.uniform(-1.0, 1.0, size=len(r)))


def stencil_2d(side: int, radius: int = 1, seed: int = 0) -> CsrMatrix:
    """(2r+1)^2-point stencil on a side x side grid."""
    y, x = np.divmod(np.arange(side * side), side)
    rows, cols = [], []
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            ok = (y + dy >= 0) & (y + dy < side) & (x + dx >= 0) & (x + dx < side)
            rows.append(np.flatnonzero(ok))
            cols.append((y[ok] + dy) * side + x[ok] + dx)
    return _with_values(side * side, np.concatenate(rows), np.concatenate(cols), seed)


def stencil_3d(side: int, seed: int = 0) -> CsrMatrix:
    """27-point stencil on a side^3 grid."""
    z, rem = np.divmod(np.arange(side ** 3), side * side)
    y, x = np.divmod(rem, side)
    rows, cols = [], []
    for dz in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                ok = ((z + dz >= 0) & (z + dz < side) & (y + dy >= 0) & (y + dy < side)
                      & (x + dx >= 0) & (x + dx < side))
                rows.append(np.flatnonzero(ok))
                cols.append(((z[ok] + dz) * side + y[ok] + dy) * side + x[ok] + dx)
    return _with_values(side ** 3, np.concatenate(rows), np.concatenate(cols), seed)


def block_diagonal(blocks: int, size: int, seed: int = 0) -> CsrMatrix:
    """Dense size x size blocks on the diagonal; A^2 has CR equal to ``size``."""
    b, i, j = np.meshgrid(np.arange(blocks), np.arange(size), np.arange(size), indexing="ij")
    return _with_values(blocks * size, (b * size + i).ravel(), (b * size + j).ravel(), seed)


def banded(n: int, half_width: int, seed: int = 0) -> CsrMatrix:
    i = np.repeat(np.arange(n), 2 * half_width + 1)
    j = i + np.tile(np.arange(-half_width, half_width + 1), n)
    ok = (j >= 0) & (j < n)
    return _with_values(n, i[ok], j[ok], seed)


def high_cr_suite(scale: float = 1.0) -> dict[str, CsrMatrix]:
    """Five structured matrices whose squares have compression ratio above 4."""
    s = lambda x: max(4, int(x * scale))  # noqa: E731
    return {
        "stencil2d_25pt": stencil_2d(s(150), radius=2, seed=1),
        "stencil2d_49pt": stencil_2d(s(80), radius=3, seed=2),
        "stencil3d_27pt": stencil_3d(s(24), seed=3),
        "block_diag_24": block_diagonal(s(400), 24, seed=4),
        "banded_hw10": banded(s(20000), 10, seed=5),
    }
