from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from brmerge.csr import CsrMatrix, csr_from_arrays
from brmerge.mmio import load_csr

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def fixture_matrices() -> dict[str, CsrMatrix]:
    return {p.stem: load_csr(p) for p in sorted(FIXTURES.glob("*.mtx"))}


@pytest.fixture(scope="session")
def fixtures():
    return fixture_matrices()


def dense_product(a: CsrMatrix, b: CsrMatrix) -> np.ndarray:
    """Textbook triple loop, independent of every CSR code path."""
    da, db = a.to_dense(), b.to_dense()
    out = np.zeros((a.rows, b.cols))
    for i in range(a.rows):
        for j in range(b.cols):
            s = 0.0
            for k in range(a.cols):
                s += da[i, k] * db[k, j]
            out[i, j] = s
    return out


@st.composite
def csr_matrices(draw, max_dim=64, max_density=0.5, rows=None, cols=None):
    m = rows if rows is not None else draw(st.integers(0, max_dim))
    n = cols if cols is not None else draw(st.integers(0, max_dim))
    density = draw(st.floats(0.0, max_density))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    k = int(round(density * m * n))
    pos = rng.choice(m * n, size=k, replace=False) if k else np.zeros(0, np.int64)
    vals = rng.uniform(-1, 1, size=k)
    return csr_from_arrays(m, n, pos // max(n, 1), pos % max(n, 1), vals)


@st.composite
def square_pairs(draw, max_dim=64, max_density=0.5):
    n = draw(st.integers(0, max_dim))
    k = draw(st.integers(0, max_dim))
    a = draw(csr_matrices(rows=n, cols=k, max_density=max_density))
    b = draw(csr_matrices(rows=k, cols=draw(st.integers(0, max_dim)), max_density=max_density))
    return a, b


class _Criterion:
    def __init__(self, results, number, title):
        self.results, self.number, self.title = results, number, title
        self.details = []
        self.status = None

    def note(self, text):
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = (self.status or "PASS") if exc_type is None else "FAIL"
        detail = "; ".join(self.details)
        if exc is not None:
            first = str(exc).strip().splitlines()[0] if str(exc).strip() else exc_type.__name__
            detail = f"{detail}; {first}" if detail else first
        self.results[self.number] = (status, self.title, detail)
        return False


def pytest_configure(config):
    config._acceptance_results = {}


@pytest.fixture
def criterion(request):
    results = request.config._acceptance_results
    return lambda number, title: _Criterion(results, number, title)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title, detail = results[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
