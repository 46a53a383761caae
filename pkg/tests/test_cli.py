import csv
import io
import json
import subprocess
import sys

import pytest

from reference import TABLE1, TABLE2, TABLE2_M
from rosdist import cli
from rosdist.dist import quantile
from rosdist.errors import ConvergenceError


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    status = cli.run(list(argv), stdout=out, stderr=err)
    return status, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.reader(io.StringIO(text)))


class TestCommands:
    def test_eig_layout(self):
        status, out, _ = call("eig", "--d", "0.1,0.2,0.3,0.4", "--count", "10")
        assert status == 0
        table = rows(out)
        assert table[0] == ["n", "D = 0.1", "D = 0.2", "D = 0.3", "D = 0.4"]
        assert [r[0] for r in table[1:]] == [str(n) for n in range(1, 11)]
        for j, D in enumerate((0.1, 0.2, 0.3, 0.4), start=1):
            got = [float(r[j]) for r in table[1:]]
            assert got == pytest.approx(TABLE1[D], rel=2e-3)

    def test_eig_fixed_grid_and_unscaled(self):
        status, out, _ = call("eig", "--d", "0.3", "--count", "3", "--grid", "300", "--unscaled")
        assert status == 0
        assert float(rows(out)[1][1]) == pytest.approx(0.6305 / 0.374166, rel=1e-3)

    def test_cdf_reference(self):
        status, out, _ = call("cdf", "--d", "0.3", "--x", "0", "--terms", "50", "--edgeworth", "6")
        assert status == 0
        table = rows(out)
        assert table[0] == ["D", "x", "cdf"]
        assert table[1][2] == "0.6169"  # 0.616900 at 6 significant digits

    def test_pdf_range(self):
        status, out, _ = call("pdf", "--d", "0.2,0.4", "--x=-1:1:5", "--terms", "20")
        assert status == 0
        table = rows(out)
        assert len(table) == 1 + 10
        assert all(float(r[2]) > 0 for r in table[1:])

    def test_quantile(self):
        # the printed reference for this cell is checked (and disputed) in the acceptance suite
        status, out, _ = call("quantile", "--d", "0.45", "--q", "0.99", "--digits", "10")
        assert status == 0
        assert float(rows(out)[1][2]) == pytest.approx(quantile(0.45, 0.99), abs=1e-9)
        status, out, _ = call("quantile", "--d", "0.45", "--q", "0.975")
        assert float(rows(out)[1][2]) == pytest.approx(2.1774, abs=5e-3)

    def test_cum(self):
        status, out, _ = call("cum", "--d", "0.3", "--count", "4", "--format", "json")
        assert status == 0
        doc = json.loads(out)
        assert doc["data"]["k"] == [1, 2, 3, 4]
        assert doc["data"]["c_k"][0] is None
        assert doc["data"]["kappa_k"][1] == pytest.approx(1.0)

    def test_levy(self):
        status, out, _ = call("levy", "--d", "0.3", "--x", "0.5,1,2", "--digits", "10")
        assert status == 0
        vals = [float(r[2]) for r in rows(out)[1:]]
        assert vals[0] > vals[1] > vals[2] > 0

    def test_table2(self):
        status, out, _ = call("table", "paper2")
        assert status == 0
        table = rows(out)
        assert table[0] == ["N", "M = 10", "M = 20", "M = 30", "M = 50"]
        for r in table[1:]:
            N = int(r[0])
            for j, M in enumerate(TABLE2_M, start=1):
                assert float(r[j]) == pytest.approx(TABLE2[N][TABLE2_M.index(M)], abs=2e-5)

    def test_table3_footnote(self):
        status, out, _ = call("table", "table3", "--digits", "5")
        assert status == 0
        lines = out.splitlines()
        assert lines[0] == "Quantile,D = 0.1,D = 0.2,D = 0.3,D = 0.4,D = 0.45"
        assert len(lines) == 1 + 11 + 1
        assert lines[-1].startswith("# ") and "D = 0.3 at q = 0.025" in lines[-1] and "D = 0.45 at q = 0.1" in lines[-1]

    def test_table1_alias(self):
        a = call("table", "paper1")
        b = call("table", "table1")
        assert a[0] == 0 and a[1] == b[1]
        assert len(rows(a[1])) == 11


class TestFormats:
    def test_json_structure(self):
        status, out, _ = call("cdf", "--d", "0.3", "--x", "0,1", "--format", "json", "--terms", "20")
        assert status == 0
        doc = json.loads(out)
        assert set(doc) == {"meta", "data"}
        assert doc["meta"]["version"]
        assert doc["meta"]["config"]["command"] == "cdf"
        assert doc["meta"]["config"]["terms"] == 20
        assert set(doc["data"]) == {"D", "x", "cdf"} and len(doc["data"]["cdf"]) == 2

    def test_digits(self):
        _, out4, _ = call("cdf", "--d", "0.3", "--x", "0", "--digits", "4")
        _, out12, _ = call("cdf", "--d", "0.3", "--x", "0", "--digits", "12")
        assert rows(out4)[1][2] == "0.6169"
        assert len(rows(out12)[1][2]) > 8

    def test_line_endings(self):
        _, out, _ = call("eig", "--d", "0.3", "--count", "2")
        assert "\r" not in out and out.endswith("\n")

    def test_out_file(self, tmp_path):
        target = tmp_path / "t.csv"
        status, out, _ = call("eig", "--d", "0.3", "--count", "2", "--out", str(target))
        assert status == 0 and out == ""
        assert target.read_text().startswith("n,D = 0.3\n")

    def test_byte_stable_with_cache(self, tmp_path):
        argv = ("quantile", "--d", "0.25", "--q", "0.1,0.9", "--cache-dir", str(tmp_path), "--format", "json")
        first = call(*argv)
        assert list(tmp_path.glob("spectrum_*.json"))
        second = call(*argv)
        assert first == second and first[0] == 0

    def test_threads(self, monkeypatch):
        serial = call("eig", "--d", "0.1,0.2,0.3", "--count", "3")
        monkeypatch.setenv("ROSDIST_THREADS", "3")
        parallel = call("eig", "--d", "0.1,0.2,0.3", "--count", "3")
        assert serial == parallel


class TestErrors:
    @pytest.mark.parametrize("argv", [
        ("eig", "--d", "0.6"),
        ("eig", "--d", "0.3", "--count", "0"),
        ("quantile", "--d", "0.3", "--q", "1.5"),
        ("cdf", "--d", "0.3", "--x", "0", "--terms", "2"),
        ("cdf", "--d", "0.3", "--x", "0", "--edgeworth", "1"),
        ("levy", "--d", "0.3", "--x", "-1"),
        ("cdf", "--d", "0.3", "--x", "0", "--digits", "0"),
    ])
    def test_usage_errors(self, argv):
        status, out, err = call(*argv)
        assert status == 2 and out == ""
        assert err.startswith("rosdist: error:")

    @pytest.mark.parametrize("argv", [
        ("eig",),
        ("bogus",),
        ("eig", "--d", "abc"),
        ("eig", "--d", "0.3", "--grid", "fine"),
        ("cdf", "--d", "0.3", "--x", "0", "--format", "xml"),
    ])
    def test_parser_errors(self, argv, capsys):
        status, out, _ = call(*argv)
        assert status == 2 and out == ""

    def test_bad_thread_count(self, monkeypatch):
        monkeypatch.setenv("ROSDIST_THREADS", "many")
        assert call("eig", "--d", "0.3,0.2", "--count", "2")[0] == 2

    def test_convergence_failure(self, monkeypatch):
        def fail(*a, **k):
            raise ConvergenceError("not stable", report={"history": [[400, [0.5]]]})

        monkeypatch.setattr(cli, "converge_spectrum", fail)
        status, out, err = call("eig", "--d", "0.3", "--count", "2")
        assert status == 3 and out == ""
        assert "convergence failure" in err and "history" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rosdist", "eig", "--d", "0.3", "--count", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "n,D = 0.3"
