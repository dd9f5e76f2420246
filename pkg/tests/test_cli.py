import json
import shutil
import subprocess

import pytest

from vconv.cli import main

EXPANDED = "w[1,1]^2*w[2,2]^2*w[1,2] - 2*w[1,1]*w[2,1]*w[1,2]^2*w[2,2] + w[2,1]^2*w[1,2]^3"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def strip_time(text):
    data = json.loads(text)
    data.pop("timestamp")
    return data


def test_dim_table_csv(capsys):
    code, out, _ = run(capsys, "dim-table", "--n", "3", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,k,formula,rank,match"
    assert len(lines) == 1 + 6 and all(line.endswith("True") for line in lines[1:])


def test_groebner_dump_shape(capsys):
    code, out, err = run(capsys, "groebner", "--n", "3", "--k", "2", "--buchberger")
    assert code == 0
    basis = json.loads(out)["basis"]
    assert (basis["n"], basis["k"]) == (3, 2) and len(basis["elements"]) == 6
    assert set(basis["elements"][0]) >= {"I", "I2", "initial", "terms"}
    assert "pairs=4" in err


def test_divide_certificate(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text(EXPANDED + "\n")
    code, out, _ = run(capsys, "divide", str(f), "--n", "2", "--k", "2")
    rep = json.loads(out)
    assert code == 0 and rep["member"] and rep["certificate"]["remainder"] == "0"
    assert rep["certificate"]["coefficients"] == ["w[1,2]"]


def test_membership_is_a_query(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text("w[1,1]")
    code, out, _ = run(capsys, "membership", str(f), "--n", "2", "--k", "2")
    assert code == 0 and json.loads(out)["member"] is False
    f.write_text(EXPANDED)
    assert json.loads(run(capsys, "membership", str(f), "--n", "2", "--k", "2")[1])["member"] is True


def test_parse_error_reports_position(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text("w[1,1]*+w[2,1]")
    code, _, err = run(capsys, "membership", str(f), "--n", "2", "--k", "1")
    assert code == 2
    assert "position" in err or "col" in err


def test_usage_errors(capsys):
    assert run(capsys, "verify", "nonsense", "--n", "2", "--k", "1")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "envelope", "--n", "1", "--k", "1", "--body", "disc:1")[0] == 2


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("VCONV_SEED", "17")
    _, out, _ = run(capsys, "wd", "--n", "1", "--k", "1", "--d", "1")
    env_run = strip_time(out)
    assert env_run["config"]["seed"] == 17
    monkeypatch.delenv("VCONV_SEED")
    _, out, _ = run(capsys, "wd", "--n", "1", "--k", "1", "--d", "1", "--seed", "17")
    assert strip_time(out) == env_run
    monkeypatch.setenv("VCONV_SEED", "abc")
    assert run(capsys, "wd", "--n", "1", "--k", "1")[0] == 2


def test_output_is_deterministic_modulo_timestamp(capsys):
    argv = ("series", "--n", "2", "--k", "1", "--order", "4", "--seed", "3")
    first = strip_time(run(capsys, *argv)[1])
    assert strip_time(run(capsys, *argv)[1]) == first


def test_out_file_and_unwritable_out(tmp_path, capsys):
    target = tmp_path / "rep.json"
    code, out, _ = run(capsys, "dim-table", "--n", "2", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["config"]["command"] == "dim-table"
    code, _, _ = run(capsys, "dim-table", "--n", "2", "--out", str(tmp_path / "missing" / "rep.json"))
    assert code == 2


def test_verify_fourier_passes(capsys):
    code, out, err = run(capsys, "verify", "fourier", "--n", "2", "--k", "2")
    assert code == 0 and "PASS" in err
    assert json.loads(out)["config"]["command"] == "verify"


def test_verify_wd_ladder(capsys):
    code, out, _ = run(capsys, "verify", "wd", "--n", "1", "--k", "1", "--d", "3")
    assert code == 0
    assert [0, 1, 2, 3] == [r["codimension"] for r in json.loads(out)["rows"]]


def test_envelope_body_controls(capsys):
    assert run(capsys, "verify", "envelope", "--n", "1", "--k", "1", "--body", "ball:2")[0] == 0
    assert run(capsys, "verify", "envelope", "--n", "1", "--k", "1", "--body", "ball:1.5")[0] == 1


@pytest.mark.skipif(shutil.which("vconv") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["vconv", "dim-table", "--n", "1", "--format", "pretty"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
