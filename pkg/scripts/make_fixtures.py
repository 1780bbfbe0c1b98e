"""Regenerate the tiny Matrix Market fixtures under fixtures/."""

from pathlib import Path

import numpy as np

from brmerge.csr import CsrMatrix, csr_from_arrays
from brmerge.mmio import write_matrix_market

OUT = Path(__file__).resolve().parents[1] / "fixtures"


def fig2_six_lists() -> CsrMatrix:
    # Row 0 has six nonzeros, so its A^2 row merges six lists over three
    # rounds. Rows 1..6 overlap in columns so every round combines entries.
    r = [0] * 6
    c = [1, 2, 3, 4, 5, 6]
    v = [1.0, 2.0, -1.0, 0.5, 3.0, -2.0]
    patterns = {1: [0, 2, 5], 2: [1, 2, 6], 3: [0, 3, 5], 4: [2, 4, 6], 5: [1, 5, 6], 6: [0, 3, 4]}
    for k, cols in patterns.items():
        r += [k] * len(cols)
        c += cols
        v += [float(k + t) for t in range(len(cols))]
    return csr_from_arrays(7, 7, r, c, v)


def dense_row(n: int = 12) -> CsrMatrix:
    r = [0] * n + list(range(1, n))
    c = list(range(n)) + list(range(1, n))
    v = np.linspace(0.5, 2.0, len(r))
    return csr_from_arrays(n, n, r, c, v)


def empty_rows() -> CsrMatrix:
    r = [0, 0, 2, 2, 4, 5]
    c = [0, 4, 1, 5, 2, 0]
    v = [1.0, -1.0, 2.0, 0.25, 4.0, 1.5]
    return csr_from_arrays(6, 6, r, c, v)


def main():
    OUT.mkdir(exist_ok=True)
    write_matrix_market(OUT / "identity.mtx", CsrMatrix.identity(3))
    write_matrix_market(OUT / "nilpotent.mtx", csr_from_arrays(2, 2, [0], [1], [1.0]))
    write_matrix_market(OUT / "dense_row.mtx", dense_row(), comment="row 0 is full: largest row nprod")
    write_matrix_market(OUT / "empty_rows.mtx", empty_rows(), comment="rows 1 and 3 are empty")
    write_matrix_market(OUT / "fig2_six_lists.mtx", fig2_six_lists(),
                        comment="row 0 of A^2 merges six intermediate lists in three rounds")
    for path in sorted(OUT.glob("*.mtx")):
        print(path.name)


if __name__ == "__main__":
    main()
