import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from brmerge import bench
from brmerge.bench import (
    BenchConfig,
    BenchReport,
    emit_csv,
    format_table,
    main,
    matrix_stats,
    run_benchmark,
)
from brmerge.csr import CsrMatrix, csr_from_arrays
from brmerge.mmio import write_matrix_market
from brmerge.randmat import random_square
from conftest import FIXTURES


def sample_report(**kw):
    base = dict(matrix="m", algo="heap", threads=2, rows=10, nnz=40, nnz_per_row=4.0, max_nnz_per_row=7,
                nprod=1234567, nnz_c=345678, compression_ratio=1234567 / 345678,
                times=[0.0123456789, 0.02], mean_time=0.01617283945)
    base.update(kw)
    return BenchReport(**base)


class TestMatrixStats:
    def test_empty(self):
        assert matrix_stats(CsrMatrix.empty(5, 5)) == (5, 0, 0.0, 0)

    def test_rows(self):
        a = csr_from_arrays(3, 3, [0, 0, 2], [0, 1, 2], [1.0, 1.0, 1.0])
        assert matrix_stats(a) == (3, 3, 1.0, 2)


class TestRunBenchmark:
    def test_identity_verified(self):
        cfg = BenchConfig(FIXTURES / "identity.mtx", "brmerge-precise", threads=2, runs=3, verify=True)
        r = run_benchmark(cfg)
        assert r.nnz_c == 3 and r.nprod == 3
        assert r.compression_ratio == 1.0
        assert r.verified is True
        assert math.isfinite(r.gflops) and len(r.times) == 3

    @pytest.mark.parametrize("algo", list(bench.ALGORITHMS))
    def test_algorithm_changes_time_only(self, algo):
        a = random_square(80, 0.08, 4)
        ref = run_benchmark(BenchConfig("x.mtx", "brmerge-upper", 1, runs=1), a)
        r = run_benchmark(BenchConfig("x.mtx", algo, 1, runs=1), a)
        assert (r.nprod, r.nnz_c, r.compression_ratio) == (ref.nprod, ref.nnz_c, ref.compression_ratio)

    def test_thread_invariance(self):
        a = random_square(120, 0.05, 9)
        r1 = run_benchmark(BenchConfig("x.mtx", "brmerge-precise", 1, runs=2), a)
        r4 = run_benchmark(BenchConfig("x.mtx", "brmerge-precise", 4, runs=2), a)
        assert (r1.rows, r1.nnz, r1.nprod, r1.nnz_c, r1.compression_ratio) == \
               (r4.rows, r4.nnz, r4.nprod, r4.nnz_c, r4.compression_ratio)

    def test_gflops_definition(self):
        r = run_benchmark(BenchConfig("x.mtx", "hash", 1, warmup=0, runs=2), random_square(30, 0.2, 1))
        assert r.gflops == 2 * r.nprod / (r.mean_time * 1e9)
        assert r.mean_time == np.mean(r.times)

    def test_non_square(self):
        a = csr_from_arrays(2, 3, [0], [1], [1.0])
        with pytest.raises(bench.DimensionError):
            run_benchmark(BenchConfig("x.mtx", runs=1), a)

    def test_config_checks(self):
        with pytest.raises(ValueError):
            BenchConfig("x.mtx", runs=0)
        with pytest.raises(ValueError):
            BenchConfig("x.mtx", algo="esc")


class TestCsv:
    def test_header_only(self):
        buf = io.StringIO()
        emit_csv([], buf)
        assert buf.getvalue() == ",".join(bench.CSV_FIELDS) + "\n"

    def test_one_report_two_lines(self):
        buf = io.StringIO()
        emit_csv([sample_report()], buf)
        assert len(buf.getvalue().splitlines()) == 2

    def test_deterministic(self):
        a, b = io.StringIO(), io.StringIO()
        emit_csv([sample_report(), sample_report(algo="hash")], a)
        emit_csv([sample_report(), sample_report(algo="hash")], b)
        assert a.getvalue() == b.getvalue()

    def test_round_trip(self):
        rep = sample_report()
        buf = io.StringIO()
        emit_csv([rep], buf)
        row = next(csv.DictReader(io.StringIO(buf.getvalue())))
        for name in ("threads", "rows", "nnz", "max_nnz_per_row", "nprod", "nnz_c"):
            assert int(row[name]) == getattr(rep, name)
        for name in ("nnz_per_row", "compression_ratio", "mean_time", "gflops"):
            assert float(row[name]) == pytest.approx(getattr(rep, name), rel=5e-6)
        times = [float(t) for t in row["times"].split(";")]
        np.testing.assert_allclose(times, rep.times, rtol=5e-6)

    def test_table_formatting(self):
        out = format_table([sample_report(nnz_per_row=64.17, compression_ratio=15.4512)])
        assert "64.2" in out and "15.45" in out


class TestCli:
    def test_table_output(self, capsys):
        assert main(["--matrix", str(FIXTURES / "identity.mtx"), "--threads", "1", "--runs", "2",
                     "--verify"]) == 0
        out = capsys.readouterr().out
        assert "identity" in out and "1.00" in out and "yes" in out

    def test_csv_to_file(self, tmp_path):
        dest = tmp_path / "r.csv"
        rc = main(["--matrix", str(FIXTURES / "fig2_six_lists.mtx"), "--matrix", str(FIXTURES / "empty_rows.mtx"),
                   "--algo", "heap", "--threads", "2", "--runs", "1", "--warmup", "0",
                   "--format", "csv", "--out", str(dest)])
        assert rc == 0
        rows = list(csv.DictReader(dest.open()))
        assert [r["matrix"] for r in rows] == ["fig2_six_lists", "empty_rows"]

    @pytest.mark.parametrize("argv", [[], ["--matrix", "x", "--algo", "esc"], ["--matrix", "x", "--threads", "0"]])
    def test_usage_error(self, argv):
        with pytest.raises(SystemExit) as e:
            main(argv)
        assert e.value.code == 1

    def test_missing_file(self, tmp_path):
        assert main(["--matrix", str(tmp_path / "nope.mtx"), "--runs", "1"]) == 2

    def test_parse_error(self, tmp_path):
        p = tmp_path / "bad.mtx"
        p.write_text("%%MatrixMarket matrix array real general\n1 1\n1\n")
        assert main(["--matrix", str(p), "--runs", "1"]) == 2

    def test_non_square_file(self, tmp_path):
        p = tmp_path / "rect.mtx"
        write_matrix_market(p, csr_from_arrays(2, 3, [0], [2], [1.0]))
        assert main(["--matrix", str(p), "--runs", "1"]) == 2

    def test_verification_failure(self, monkeypatch, capsys):
        def broken(a, b, p):
            c = bench.spgemm_precise(a, b, p)
            val = np.array(c.val)
            val[0] += 1.0
            return CsrMatrix(c.rows, c.cols, c.rpt, c.col, val)

        monkeypatch.setitem(bench.ALGORITHMS, "hash", broken)
        rc = main(["--matrix", str(FIXTURES / "fig2_six_lists.mtx"), "--algo", "hash", "--threads", "1",
                   "--runs", "1", "--verify"])
        assert rc == 3
        err = capsys.readouterr().err
        assert "row 0" in err and "values differ" in err

    def test_module_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "brmerge", "--matrix", str(FIXTURES / "identity.mtx"),
                            "--runs", "1", "--format", "csv"], capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        assert r.stdout.startswith("matrix,algo,")
