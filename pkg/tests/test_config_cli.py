"""Config parsing, table IO, and the command-line entry point."""

import json

import numpy as np
import pytest

import fiberqed as fq
from fiberqed.cli import _resolve_workers, main
from fiberqed.config import merge, parse_config, parse_dipole, serialize_config
from fiberqed.tables import read_table, write_table


def test_config_round_trip():
    text = "n_atoms = 7\na_nm = 812.5\ndipole = circ\nquad_rel_tol = 1e-9\n"
    cfg = parse_config(text)
    assert cfg == {"n_atoms": 7, "a_nm": 812.5, "dipole": "circ", "quad_rel_tol": 1e-9}
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    # Serialization is canonical: one more cycle is byte-stable.
    assert serialize_config(again) == serialize_config(cfg)


def test_config_comments_and_blanks():
    cfg = parse_config("# heading\n\nn_atoms = 3   # trailing comment\n")
    assert cfg == {"n_atoms": 3}


def test_config_rejects_unknown_key():
    with pytest.raises(fq.ConfigError, match="line 2"):
        parse_config("n_atoms = 3\nfrobnicate = 1\n")


def test_config_rejects_malformed_line():
    with pytest.raises(fq.ConfigError, match="key = value"):
        parse_config("n_atoms 3\n")


def test_config_rejects_bad_type():
    with pytest.raises(fq.ConfigError, match="expects int"):
        parse_config("n_atoms = twelve\n")


def test_merge_validates_and_coerces():
    cfg = merge({"omega_L_over_gamma": 1})  # int promoted to float
    assert cfg["omega_L_over_gamma"] == 1.0
    assert cfg["n_atoms"] == 15  # default fills in
    with pytest.raises(fq.ConfigError):
        merge({"n_atoms": "many"})
    with pytest.raises(fq.ConfigError):
        merge({"bogus": 1})


def test_parse_dipole():
    circ = parse_dipole("circ")
    assert np.allclose(circ, (1j / np.sqrt(2), 0, -1 / np.sqrt(2)))
    assert parse_dipole("x") == (1.0, 0.0, 0.0)
    assert parse_dipole("1, 0, 0") == (1 + 0j, 0j, 0j)
    vec = parse_dipole("0.5+0.5i, 0, 0.7071")
    assert vec[0] == 0.5 + 0.5j
    for bad in ("1,2", "a,b,c", "0, 0, 0", "northwest"):
        with pytest.raises(fq.ConfigError):
            parse_dipole(bad)


def test_table_round_trip(tmp_path):
    cols = ["x", "flag", "z"]
    rows = [[1.5, True, 1 + 2j], [float("nan"), False, None]]
    p = write_table(tmp_path / "t.csv", "t", cols, rows, {"alpha": 0.1, "note": "hi"})
    meta, columns, body = read_table(p)
    assert meta["table"] == "t"
    assert meta["alpha"] == "0.10000000000000001"
    assert meta["note"] == "hi"
    assert columns == cols
    assert body[0] == ["1.5", "true", "1+2j"]
    assert body[1][1] == "false" and body[1][2] == ""
    # JSON mirror carries the same payload with NaN mapped to null.
    pj = write_table(tmp_path / "t.json", "t", cols, rows, {"alpha": 0.1}, fmt="json")
    doc = json.loads(pj.read_text())
    assert doc["columns"] == cols
    assert doc["rows"][0][2] == [1.0, 2.0]
    assert doc["rows"][1][0] is None


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv("FIBERQED_THREADS", raising=False)
    assert _resolve_workers(merge()) == 1
    assert _resolve_workers(merge({"threads": 2})) == 2
    monkeypatch.setenv("FIBERQED_THREADS", "3")
    assert _resolve_workers(merge()) == 3
    assert _resolve_workers(merge({"threads": 2})) == 2  # config wins
    monkeypatch.setenv("FIBERQED_THREADS", "lots")
    with pytest.raises(fq.ConfigError):
        _resolve_workers(merge())


def test_compute_beta_f_exit_and_payload(capsys):
    assert main(["compute", "beta_f"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["selector"] == "beta_f"
    assert record["outputs"]["beta_f_per_m"] == pytest.approx(6602128.354, rel=1e-9)
    assert record["outputs"]["single_mode"] is True
    assert record["certificates"]["dispersion_residual"] < 1e-12
    assert record["inputs"]["n_atoms"] == 15


def test_compute_single_atom(capsys):
    assert main(["compute", "single_atom"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["outputs"]["beta"] == pytest.approx(0.149024, abs=1e-5)
    assert record["outputs"]["C"] == pytest.approx(0.720277, abs=1e-5)


def test_bad_selector_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["compute", "nonsense"])
    assert exc.value.code == 2


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_atoms = 3\nwhatever = 1\n")
    out = tmp_path / "out"
    assert main(["fig5", "--config", str(bad), "--out", str(out)]) == 2
    assert "config error" in capsys.readouterr().err
    assert not out.exists()  # nothing created on a usage failure


def test_missing_config_file_exit_code(tmp_path, capsys):
    assert main(["compute", "beta_f", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_computational_failure_exit_code(tmp_path, capsys):
    # Radius far below cutoff: the dispersion solve fails, exit code 1.
    cfg = tmp_path / "thin.cfg"
    cfg.write_text("r_f_nm = 50\n")
    assert main(["compute", "beta_f", "--config", str(cfg)]) == 1
    assert "error" in capsys.readouterr().err


def test_fig5_small_grid_end_to_end(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("n_grid_theta = 3\n")
    out = tmp_path / "out"
    assert main(["fig5", "--config", str(cfg), "--out", str(out)]) == 0
    files = capsys.readouterr().out.strip().splitlines()
    assert len(files) == 1
    meta, columns, rows = read_table(files[0])
    assert columns[:5] == ["theta_z_rad", "theta_x_rad", "gamma_total", "beta", "C"]
    assert len(rows) == 9
    assert meta["cfg.n_grid_theta"] == "3"
    assert "cfg.threads" not in meta
    # Untouched dipole at (0, 0) reproduces the canonical chirality.
    first = dict(zip(columns, rows[0]))
    assert float(first["C"]) == pytest.approx(0.720277, abs=1e-5)


def test_fig5_json_format(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("n_grid_theta = 2\n")
    out = tmp_path / "out"
    assert main(["fig5", "--config", str(cfg), "--out", str(out), "--format", "json"]) == 0
    path = capsys.readouterr().out.strip().splitlines()[0]
    doc = json.loads((out / "fig5_maps.json").read_text())
    assert path.endswith("fig5_maps.json")
    assert doc["table"] == "fig5_maps"
    assert len(doc["rows"]) == 4
