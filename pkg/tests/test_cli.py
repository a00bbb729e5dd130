"""Scenario CLI: schema strictness, determinism, envelopes, exit codes."""

import json
import os

import numpy as np
import pytest

from greenmodes import cli


def write_scenario(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
    return str(path)


def cube_scenario(name="cube", n_max=2):
    return {
        "name": name,
        "geometry": {"type": "pec_box", "lengths": [1.0, 1.0, 1.0],
                     "n_max": n_max},
    }


def ww_scenario(name="ww-vac"):
    return {
        "name": name,
        "geometry": {"type": "bulk", "permittivity": {"model": "constant",
                                                      "value": 1.0}},
        "atom": {"position": [0.0, 0.0, 0.0], "dipole": [0.0, 0.0, 0.6],
                 "omega0": 1.0},
        "kernel": {"route": "lna", "omega_max": 2.0},
        "time": {"t_max": 40.0, "n_steps": 800},
    }


def run(args):
    return cli.main([str(a) for a in args])


def test_modes_csv_and_envelope(tmp_path):
    cfg = write_scenario(tmp_path / "cube.json", cube_scenario())
    out = tmp_path / "out"
    assert run(["modes", "--config", cfg, "--out", out, "--quiet"]) == 0
    table = out / "cube_modes.csv"
    lines = table.read_text().splitlines()
    assert lines[0] == "m,n,p,branch,omega"
    # 2 n^3 + 3 n^2 rows at n_max = 2
    assert len(lines) == 1 + 28
    env = json.loads((out / "cube_envelope.json").read_text())
    assert env["subcommand"] == "modes"
    assert env["summary"]["n_modes"] == 28
    assert env["scenario"] == cube_scenario()
    assert sorted(env["files"]) == ["cube_modes.csv"]
    assert env["warnings"] == []


def test_rerun_is_byte_identical(tmp_path):
    cfg = write_scenario(tmp_path / "cube.json", cube_scenario())
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run(["modes", "--config", cfg, "--out", out_a, "--quiet"]) == 0
    assert run(["modes", "--config", cfg, "--out", out_b, "--quiet"]) == 0
    assert (out_a / "cube_modes.csv").read_bytes() \
        == (out_b / "cube_modes.csv").read_bytes()


def test_unknown_key_exits_schema_and_writes_nothing(tmp_path, capsys):
    payload = cube_scenario()
    payload["junk"] = 1
    cfg = write_scenario(tmp_path / "bad.json", payload)
    out = tmp_path / "never-created"
    assert run(["modes", "--config", cfg, "--out", out]) == cli.EXIT_SCHEMA
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["kind"] == "schema"
    assert "junk" in err["error"]["message"]
    assert not out.exists()


def test_missing_config_exits_io(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert run(["modes", "--config", missing]) == cli.EXIT_IO
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["kind"] == "io"


def test_malformed_json_exits_schema(tmp_path, capsys):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{not json")
    assert run(["modes", "--config", cfg]) == cli.EXIT_SCHEMA
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["kind"] == "schema"


def test_set_override_reaches_builder(tmp_path):
    cfg = write_scenario(tmp_path / "cube.json", cube_scenario())
    out = tmp_path / "out"
    assert run(["modes", "--config", cfg, "--out", out, "--quiet",
                "--set", "geometry.n_max=3"]) == 0
    env = json.loads((out / "cube_envelope.json").read_text())
    assert env["scenario"]["geometry"]["n_max"] == 3
    assert env["summary"]["n_modes"] == 2 * 27 + 3 * 9


def test_override_does_not_touch_config_file(tmp_path):
    cfg = write_scenario(tmp_path / "cube.json", cube_scenario())
    before = open(cfg, "rb").read()
    out = tmp_path / "out"
    assert run(["modes", "--config", cfg, "--out", out, "--quiet",
                "--set", "geometry.n_max=4"]) == 0
    assert open(cfg, "rb").read() == before


def test_json_table_format(tmp_path):
    cfg = write_scenario(tmp_path / "cube.json", cube_scenario())
    out = tmp_path / "out"
    assert run(["modes", "--config", cfg, "--out", out, "--quiet",
                "--format", "json"]) == 0
    table = json.loads((out / "cube_modes.json").read_text())
    assert table["columns"] == ["m", "n", "p", "branch", "omega"]
    assert len(table["rows"]) == 28


def test_envelope_scenario_round_trips(tmp_path):
    cfg = write_scenario(tmp_path / "cube.json", cube_scenario())
    out = tmp_path / "out"
    assert run(["modes", "--config", cfg, "--out", out, "--quiet"]) == 0
    env = json.loads((out / "cube_envelope.json").read_text())
    cfg2 = write_scenario(tmp_path / "echo.json", env["scenario"])
    out2 = tmp_path / "out2"
    assert run(["modes", "--config", cfg2, "--out", out2, "--quiet"]) == 0
    assert (out / "cube_modes.csv").read_bytes() \
        == (out2 / "cube_modes.csv").read_bytes()


def test_quiet_silences_stdout(tmp_path, capsys):
    cfg = write_scenario(tmp_path / "cube.json", cube_scenario())
    out = tmp_path / "out"
    assert run(["modes", "--config", cfg, "--out", out, "--quiet"]) == 0
    assert capsys.readouterr().out == ""
    assert run(["modes", "--config", cfg, "--out", out]) == 0
    assert "wrote" in capsys.readouterr().out


def test_out_env_var_honored(tmp_path, monkeypatch):
    cfg = write_scenario(tmp_path / "cube.json", cube_scenario())
    target = tmp_path / "from-env"
    monkeypatch.setenv(cli.OUT_ENV_VAR, str(target))
    assert run(["modes", "--config", cfg, "--quiet"]) == 0
    assert (target / "cube_modes.csv").exists()


def test_bad_scenario_name_rejected(tmp_path, capsys):
    payload = cube_scenario(name="has space")
    cfg = write_scenario(tmp_path / "bad-name.json", payload)
    assert run(["modes", "--config", cfg]) == cli.EXIT_SCHEMA
    capsys.readouterr()


def test_ww_summary_and_files(tmp_path):
    cfg = write_scenario(tmp_path / "ww.json", ww_scenario())
    out = tmp_path / "out"
    assert run(["ww", "--config", cfg, "--out", out, "--quiet"]) == 0
    summary = json.loads((out / "ww-vac_ww_summary.json").read_text())
    # pure vacuum chain: rate gamma^2 omega0^3 / 3 pi
    assert summary["gamma"] == pytest.approx(0.36 / (3.0 * np.pi), rel=1e-12)
    assert summary["provenance"] == "lna"
    assert 0.0 < summary["population_final"] < 1.0
    lines = (out / "ww-vac_ww.csv").read_text().splitlines()
    assert lines[0] == "t,re_c,im_c,population"
    assert len(lines) == 1 + 801
    env = json.loads((out / "ww-vac_envelope.json").read_text())
    assert sorted(env["files"]) == ["ww-vac_ww.csv", "ww-vac_ww_summary.json"]
    assert env["summary"]["fit_gamma"] == summary["fit_gamma"]
