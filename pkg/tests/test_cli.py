import csv
import io
import json

import pytest

from teig import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0][0].startswith("# config ")
    echo = json.loads(rows[0][0][len("# config "):])
    return echo, rows[1], rows[2:]


def test_eig_bie(capsys):
    code, out, _ = run(capsys, "eig", "--curve", "circle", "--radius", "1", "--n", "4", "--ntilde", "1",
                       "--eta", "0", "--mu", "3.1", "--nodes", "40")
    assert code == 0
    echo, header, rows = table(out)
    assert header[:5] == ["k_re", "k_im", "residual", "cluster", "method"]
    assert len(rows) == 5 and rows[0][0].startswith("2.9026")
    assert all(r[4] == "bie" for r in rows)
    assert echo["seed"] == 42 and echo["quad_nodes"] == 24


def test_eig_oracle(capsys):
    code, out, _ = run(capsys, "eig", "--oracle", "disk", "--variant", "conductive", "--n", "4", "--eta", "1",
                       "--range", "2.5:3.5")
    assert code == 0
    ks = [round(float(r[0]), 4) for r in table(out)[2]]
    assert ks == [2.7741, 2.7741, 3.2908, 3.3122, 3.3122]


def test_odd_nodes_exit_2(capsys):
    code, _, err = run(capsys, "eig", "--nodes", "7")
    assert code == 2 and "even" in err


def test_bad_flag_exit_2(capsys):
    code, _, _ = run(capsys, "eig", "--no-such-flag")
    assert code == 2


def test_solver_error_exit_3(capsys):
    code, _, err = run(capsys, "invert", "--mode", "small", "--k1", "50")
    assert code == 3 and "range" in err


def test_json_schema(capsys):
    code, out, _ = run(capsys, "oracle", "roots", "--variant", "classical", "--n", "4", "--range", "2.5:3.5", "--json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"command", "config_echo", "rows"}
    assert doc["command"] == "oracle"
    assert [r["m"] for r in doc["rows"]] == [1, 0, 2]
    assert [r["multiplicity"] for r in doc["rows"]] == [2, 1, 2]


def test_out_file(tmp_path, capsys):
    path = tmp_path / "t.csv"
    code, out, _ = run(capsys, "oracle", "dirichlet", "--m", "1", "--s", "1", "--out", str(path))
    assert code == 0 and out == ""
    _, header, rows = table(path.read_text())
    assert header == ["query", "m", "s", "value"]
    assert rows[0][3] == "3.83170597020751"


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# modified eigenvalue\nn = 3\nm=1\n")
    code, out, _ = run(capsys, "oracle", "modified", "--config", str(cfg))
    echo, _, rows = table(out)
    assert code == 0 and float(rows[0][3]) == pytest.approx(2.212236473354803, abs=1e-14)
    assert echo["n"] == 3.0
    # flags override the file
    code, out, _ = run(capsys, "oracle", "modified", "--config", str(cfg), "--n", "4", "--m", "2")
    assert float(table(out)[2][0][3]) == pytest.approx(2.567811150920341, abs=1e-14)


def test_config_file_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this line has no equals sign\n")
    assert run(capsys, "oracle", "modified", "--config", str(cfg))[0] == 2
    assert run(capsys, "oracle", "modified", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_sweep_table1(capsys):
    code, out, _ = run(capsys, "sweep", "--table", "1", "--paper-format")
    assert code == 0
    _, header, rows = table(out)
    assert header == ["eta", "k1", "eoc1"]
    assert len(rows) == 10
    assert rows[-1] == ["1/1024", "2.9025", "1.0005"]
    assert rows[0][2] == "" and rows[1][2] == ""


def test_sweep_table4_first_row(capsys):
    code, out, _ = run(capsys, "sweep", "--table", "4", "--paper-format")
    assert code == 0
    assert table(out)[2][0] == ["80", "2.3772", "", "3.2053", "", "3.4197", ""]


def test_sweep_three_rows_explicit_reference(capsys):
    code, out, _ = run(capsys, "sweep", "--variant", "conductive", "--direction", "to_zero", "--eta0", "0.5",
                       "--steps", "3", "--seeds", "2.84@1", "--reference", "2.902608055212766")
    assert code == 0
    rows = table(out)[2]
    assert len(rows) == 3
    assert sum(1 for r in rows if r[2] != "") == 1


def test_invert_small(capsys):
    code, out, _ = run(capsys, "invert", "--mode", "small", "--eta", "0.1", "--measure", "classical", "--n-true", "4")
    assert code == 0
    row = table(out)[2][0]
    assert abs(float(row[2]) - 3.979992664293090) <= 1e-9
    assert abs(float(row[3])) <= 1e-9


def test_invert_large(capsys):
    code, out, _ = run(capsys, "invert", "--mode", "large", "--measure", "zero_index", "--n-true", "3",
                       "--eta-true", "200")
    assert code == 0
    assert abs(float(table(out)[2][0][2]) - 2.970300636020707) <= 1e-9


def test_invert_exact_limit(capsys):
    code, out, _ = run(capsys, "invert", "--mode", "large", "--k1", "1.9158529851037562")
    assert code == 0 and abs(float(table(out)[2][0][2]) - 4.0) <= 1e-12


def test_invert_needs_measurement(capsys):
    assert run(capsys, "invert", "--mode", "small")[0] == 2


def test_validate_pass(capsys):
    code, out, _ = run(capsys, "validate", "--nodes", "40", "--n", "4", "--ntilde", "1", "--eta", "0", "--tol", "5e-4")
    assert code == 0
    rows = table(out)[2]
    assert len(rows) == 5 and max(float(r[3]) for r in rows) <= 5e-4


def test_validate_conductive_160(capsys):
    code, _, _ = run(capsys, "validate", "--nodes", "160", "--n", "4", "--ntilde", "1", "--eta", "1", "--tol", "5e-4")
    assert code == 0


def test_validate_fail(capsys):
    code, _, err = run(capsys, "validate", "--nodes", "12", "--tol", "1e-6")
    assert code == 4 and "exceeds" in err
