import csv
import json
import subprocess
import sys

import pytest

from casecost.cli import main
from casecost.ingestion import load_dir


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    assert main(["generate", "--cmgs", "40", "--seed", "42", "--noise", "0.2", "-o", str(d)]) == 0
    return d


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_generate_files(tmp_path):
    assert main(["generate", "--cmgs", "163", "--seed", "42", "-o", str(tmp_path)]) == 0
    for name in ("cases.csv", "params.csv", "benchmark.csv", "ground_truth.csv", "run.json"):
        assert (tmp_path / name).exists()
    bench = _rows(tmp_path / "benchmark.csv")[1:]
    assert len({r[0] for r in bench}) == 163


def test_generate_byte_identical(tmp_path):
    for sub in ("a", "b"):
        assert main(["generate", "--cmgs", "30", "--seed", "9", "-o", str(tmp_path / sub)]) == 0
    for name in ("cases.csv", "params.csv", "benchmark.csv", "ground_truth.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_generate_zero_cmgs_is_usage_error(tmp_path, capsys):
    assert main(["generate", "--cmgs", "0", "-o", str(tmp_path)]) == 2
    assert "n_cmgs" in capsys.readouterr().err


def test_estimate_m1_rows(data_dir, tmp_path):
    assert main(["estimate", "--model", "m1", str(data_dir), "-o", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "estimates.csv")
    assert rows[0] == ["case_id", "cmg", "model", "cce"]
    assert len(rows) - 1 == len(load_dir(data_dir).cases)


def test_estimate_m5_conserves_total(data_dir, tmp_path, capsys):
    argv = ["estimate", "--model", "m5", "--k1", "1.3", "--k2", "0.5", "--k3", "2.85", str(data_dir), "-o", str(tmp_path)]
    assert main(argv) == 0
    line = capsys.readouterr().out
    est_sum = float(line.split(" sum ")[1].split(",")[0])
    bench_sum = float(line.split("benchmark sum ")[1].split(" ")[0])
    assert est_sum == pytest.approx(bench_sum, abs=0.01)


def test_estimate_hybrid_rejected(data_dir, capsys):
    assert main(["estimate", "--model", "hybrid", str(data_dir)]) == 2
    assert "report --hybrid" in capsys.readouterr().err


def test_report_table(data_dir, tmp_path):
    assert main(["report", "--models", "m1,m2,m3,m4,m5", str(data_dir), "-o", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "performance.csv")
    assert rows[0] == ["measure", "M1", "M2", "M3", "M4", "M5"]
    assert [r[0] for r in rows[1:]] == ["E_avg", "E_min", "E_max", "P 0-5", "P 5-10", "P 10-15",
                                        "P 15-20", "P 20-30", "P 30-50", "P 50-inf"]
    stats = _rows(tmp_path / "cmg_stats.csv")
    assert stats[0] == ["cmg", "model", "case_count", "total", "average", "stdev", "min", "max"]


def test_report_hybrid_column_uses_m5_extremes(data_dir, tmp_path):
    assert main(["report", "--models", "m3,m5", "--hybrid", str(data_dir), "-o", str(tmp_path)]) == 0
    stats = _rows(tmp_path / "cmg_stats.csv")[1:]
    by = {(r[1], r[0]): r for r in stats}
    cmgs = {r[0] for r in stats}
    for cmg in cmgs:
        m3, m5, h = by[("M3", cmg)], by[("M5", cmg)], by[("HYBRID", cmg)]
        assert h[3:6] == m3[3:6]  # total, average, stdev
        if int(h[2]) > 1 and float(m5[6]) <= float(m3[4]) <= float(m5[7]):
            assert h[6:8] == m5[6:8]


def test_report_json(data_dir, tmp_path):
    assert main(["--format", "json", "report", "--hybrid", str(data_dir), "-o", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "performance.json").read_text())
    assert payload["models"] == ["M1", "M2", "M3", "M4", "M5", "HYBRID"]
    assert len(payload["rows"]) == 10
    assert (tmp_path / "cmg_stats.json").exists()


def test_report_empty_models(data_dir, capsys):
    assert main(["report", "--models", "", str(data_dir)]) == 2


def test_report_bad_data_exit_1(tmp_path, capsys):
    assert main(["generate", "--cmgs", "3", "--seed", "1", "-o", str(tmp_path)]) == 0
    text = (tmp_path / "benchmark.csv").read_text().splitlines()
    (tmp_path / "benchmark.csv").write_text("\n".join(text[:-1]) + "\n")
    assert main(["report", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_optimize_singleton(data_dir, tmp_path, capsys):
    assert main(["optimize", "--k1", "1.3", "--k2", "0.5", "--k3", "2.85", str(data_dir), "-o", str(tmp_path)]) == 0
    assert "best k1=1.3 k2=0.5 k3=2.85" in capsys.readouterr().out


def test_optimize_ranges(data_dir, tmp_path):
    argv = ["optimize", "--k1", "1.0:2.0:0.1", "--k2", "0.3:0.7:0.1", "--k3", "2.0:3.0:0.05",
            str(data_dir), "-o", str(tmp_path), "--trace"]
    assert main(argv) == 0
    row = _rows(tmp_path / "optimize.csv")
    best = dict(zip(row[0], row[1]))
    assert 1.0 <= float(best["k1"]) <= 2.0
    assert 0.3 <= float(best["k2"]) <= 0.7
    assert 2.0 <= float(best["k3"]) <= 3.0
    assert len(_rows(tmp_path / "trace.csv")) == 11 * 5 * 21 + 1


def test_optimize_cap(data_dir, capsys):
    argv = ["optimize", "--k1", "1:2:0.001", "--k2", "1:2:0.001", "--k3", "1:2:0.01", str(data_dir)]
    assert main(argv) == 2
    assert "cap" in capsys.readouterr().err


def test_warnings_do_not_change_exit_code(tmp_path, capsys):
    assert main(["generate", "--cmgs", "3", "--seed", "1", "-o", str(tmp_path)]) == 0
    lines = (tmp_path / "cases.csv").read_text().splitlines()
    cid, cmg, pac, riw, tot, acute, alc, sc = lines[1].split(",")
    lines[1] = ",".join([cid, cmg, pac, riw, str(int(tot) + 1), acute, alc, sc])
    (tmp_path / "cases.csv").write_text("\n".join(lines) + "\n")
    assert main(["estimate", "--model", "m4", str(tmp_path)]) == 0
    assert "LOS sum mismatch" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "casecost.cli", "generate", "--cmgs", "2", "-o", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
