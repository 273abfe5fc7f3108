import csv
import json
import subprocess
import sys

import pytest

from orbitpressure import io
from orbitpressure.cli import main
from orbitpressure.config import parse_text

HEADER = ("schema_version,command,system,potential,measure,kind,q,n,eps,M,seed,method,"
          "value,covered_mass,centers,walltime_ms,status")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def data_rows(text):
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    assert lines[0] == HEADER
    return list(csv.DictReader(lines))


def test_dist_doubling_example(capsys):
    code, out, _ = run(capsys, "dist", "--system", "doubling", "--x", "0", "--y", "0.001", "--n", "3",
                       "--metric", "bowen")
    assert code == 0
    (row,) = data_rows(out)
    assert row["value"] == "0.004" and row["status"] == "ok"


def test_dist_fk_self_distance(capsys):
    code, out, _ = run(capsys, "dist", "--system", "doubling", "--x", "0.37", "--n", "5", "--metric", "fk",
                       "--x-equals-y")
    assert code == 0
    assert data_rows(out)[0]["value"] == "0"


def test_dist_seeded_is_deterministic(capsys):
    argv = ("dist", "--system", "fullshift2", "--seed", "7", "--n", "4", "--metric", "fk")
    first = run(capsys, *argv)
    assert first[0] == 0
    assert run(capsys, *argv) == first


def test_dist_all_metrics_ordered(capsys):
    _, out, _ = run(capsys, "dist", "--system", "fullshift2", "--seed", "3", "--n", "6,3",
                    "--metric", "mean,fk,bowen,maxmean", "--q", "2,1")
    rows = data_rows(out)
    keys = [(r["kind"], int(r["q"]), int(r["n"])) for r in rows]
    order = ["bowen", "mean", "maxmean", "fk"]
    assert keys == sorted(keys, key=lambda k: (order.index(k[0]), k[1], k[2]))
    assert len(rows) == 16


def test_spec_echo_contains_defaults(capsys):
    _, out, _ = run(capsys, "table", "--system", "fullshift", "--variant", "spanning", "--n", "6",
                    "--eps", "0.0625")
    head = [ln for ln in out.splitlines() if ln.startswith("# ")]
    assert "# orbit-pressure schema_version=1" in head
    for line in ("# method=greedy", "# potential=zero", "# q=1", "# length=256"):
        assert line in head


def test_table_summary_gap(capsys):
    code, out, _ = run(capsys, "table", "--system", "fullshift", "--variant", "topological",
                       "--n", "10,14", "--eps", "0.0625")
    assert code == 0
    summary = [ln for ln in out.splitlines() if ln.startswith("# summary")]
    extrap = [ln for ln in summary if "type=extrapolation" in ln]
    assert extrap
    gap = float(next(tok for tok in extrap[0].split() if tok.startswith("gap=")).split("=")[1])
    assert gap <= 0.1


def test_table_json_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"t{i}.json"
        code = main(["table", "--system", "doubling", "--variant", "measure", "--measure", "lebesgue",
                     "--n", "4,6", "--eps", "0.1", "--M", "500", "--seed", "3", "--metric", "bowen,mean",
                     "--format", "json", "--output", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["schema_version"] == 1
    assert set(doc) == {"schema_version", "spec", "columns", "rows", "summary"}
    assert len(doc["rows"]) == 4


def test_empty_n_list_is_config_error(tmp_path, capsys):
    path = tmp_path / "never.csv"
    code, _, err = run(capsys, "table", "--system", "fullshift", "--variant", "spanning", "--n", "",
                       "--eps", "0.1", "--output", str(path))
    assert code == 2 and "config error" in err
    assert not path.exists()


def test_config_file_errors_have_position(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("command = table\nsystem = fullshift\n  eps = 0.1\nn = 4, x\n")
    code, _, err = run(capsys, "table", "--config", str(cfg))
    assert code == 2 and "line 4" in err
    cfg.write_text("command = table\nsystem = fullshift\nsystem = golden\n")
    code, _, err = run(capsys, "table", "--config", str(cfg))
    assert code == 2 and "line 3" in err


def test_config_file_round_trip(tmp_path, capsys):
    cfg = tmp_path / "ok.cfg"
    cfg.write_text("# golden-mean entropy\ncommand = table\nsystem = golden\nvariant = spanning\n"
                   "n = 8\neps = 0.0625\n")
    code, out, _ = run(capsys, "table", "--config", str(cfg))
    assert code == 0
    assert data_rows(out)[0]["system"] == "sft[11,10]"


def test_parse_text_reports_column():
    with pytest.raises(Exception) as info:
        parse_text("n = 4\nnoequals\n")
    assert "line 2" in str(info.value)


def test_failed_cells_are_flagged(capsys):
    code, out, _ = run(capsys, "table", "--system", "fullshift", "--variant", "topological",
                       "--n", "6,30", "--eps", "0.0625")
    assert code == 3
    rows = data_rows(out)
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"] == "error:PROBLEM_TOO_LARGE" and rows[1]["value"] == ""


def test_walltime_only_when_requested(capsys):
    argv = ("table", "--system", "fullshift", "--variant", "spanning", "--n", "6", "--eps", "0.0625")
    _, out, _ = run(capsys, *argv)
    assert data_rows(out)[0]["walltime_ms"] == ""
    _, out, _ = run(capsys, *argv, "--record-time")
    assert float(data_rows(out)[0]["walltime_ms"]) >= 0


def test_brin_katok_command(capsys):
    code, out, _ = run(capsys, "brin-katok", "--system", "fullshift", "--measure", "bernoulli:0.5,0.5",
                       "--n", "6", "--delta", "0.125", "--M", "2000", "--seed", "1", "--centers", "5",
                       "--metric", "bowen")
    assert code == 0
    assert any("type=brin_katok" in ln for ln in out.splitlines())


def test_verify_fk_oracle_exact_count(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "fk-oracle", "--n-max", "8")
    assert code == 0
    assert "exact-match count 200/200" in out


def test_verify_injected_fault(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "fk-oracle", "--inject-fault")
    assert code == 1
    assert "FAIL fk-oracle" in out


def test_verify_unknown_suite(capsys):
    code, _, _ = run(capsys, "verify", "--suite", "nonsense")
    assert code == 2


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "orbitpressure.cli", "--version"],
                         capture_output=True, text=True, check=True)
    assert "orbit-pressure" in out.stdout


def test_atomic_write_replaces_whole_file(tmp_path):
    path = tmp_path / "f.txt"
    io.atomic_write(str(path), "first\n")
    io.atomic_write(str(path), "second\n")
    assert path.read_text() == "second\n"
    assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]


def test_fmt12():
    assert io.fmt12(1 / 3) == "0.333333333333"
    assert io.fmt12(0.004) == "0.004"
