import json

import pytest

from frontsel.cli import main
from frontsel.config import build_model, build_setup, config_hash, load_config, validate_config
from frontsel.errors import ConfigError
from frontsel.model import LVModel, NonlocalModel, ScalarModel

LV_TOML = """
[model]
kind = "lv_system"
[model.lv]
a = 0.5
b = 0.5
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(args, capsys):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def test_load_toml_and_json_agree(tmp_path):
    a = load_config(write(tmp_path, "a.toml", LV_TOML))
    b = load_config(write(tmp_path, "b.json", json.dumps({"model": {"kind": "lv_system",
                                                                    "lv": {"a": 0.5, "b": 0.5}}})))
    assert a == b and config_hash(a) == config_hash(b)
    assert isinstance(build_model(a), LVModel)


def test_unknown_key_rejected_with_context(tmp_path):
    with pytest.raises(ConfigError, match="model/lv"):
        load_config(write(tmp_path, "c.toml", LV_TOML + "colour = 1\n"))


def test_syntax_error_has_line(tmp_path):
    with pytest.raises(ConfigError, match="line"):
        load_config(write(tmp_path, "d.toml", "[model\nkind = 1\n"))


def test_builders():
    cfg = {"model": {"kind": "scalar_nonlocal", "kernel": {"shape": "parabolic_bump"}},
           "grid": {"h": 0.05, "length": 100.0}, "run": {"t_end": 20.0, "comoving": False}}
    validate_config(cfg)
    m = build_model(cfg)
    assert isinstance(m, NonlocalModel) and m.kernel.h == 0.05
    s = build_setup(cfg)
    assert s.length == 100.0 and s.t_end == 20.0 and not s.comoving
    assert isinstance(build_model({"model": {"kind": "scalar_local"}}), ScalarModel)
    with pytest.raises(ConfigError):
        build_model({"model": {"kind": "lv_system"}})


def test_dispersion_lv(tmp_path, capsys):
    cfg = write(tmp_path, "lv.toml", LV_TOML)
    code, out, _ = run(["dispersion", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["plus_infinity"]["degenerate_double"] is True
    assert rep["plus_infinity"]["lambda_u_plus"] == pytest.approx(0.70711, abs=1e-5)
    saved = json.loads((tmp_path / "o" / "dispersion.json").read_text())
    assert saved["schema"].startswith("frontsel.")
    record = json.loads((tmp_path / "o" / "run_record.json").read_text())
    assert record["manifest"] == ["dispersion.json"]
    assert all((tmp_path / "o" / m).exists() for m in record["manifest"])


def test_dispersion_hadeler_rothe(tmp_path, capsys):
    cfg = write(tmp_path, "hr.toml", '[model]\nkind = "scalar_local"\n[model.nonlinearity]\n'
                                     'kind = "hadeler_rothe"\ns = 8.0\n')
    code, out, _ = run(["dispersion", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 0 and json.loads(out)["minimal_speed_formula"] == pytest.approx(2.5)


def test_malformed_config_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, "bad.toml", LV_TOML + "[grid]\nh = -1\n")
    code, _, err = run(["dispersion", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 2 and "grid/h" in err
    code, _, _ = run(["speed", "--out", tmp_path / "o"], capsys)
    assert code == 2


def test_numeric_failure_exit_3(tmp_path, capsys):
    cfg = write(tmp_path, "w.toml", '[model]\nkind = "scalar_local"\n[model.nonlinearity]\n'
                                    'kind = "hadeler_rothe"\ns = 3.0\n[wave]\nc = 1.9\n')
    code, _, err = run(["wave", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 3 and "no monotone wave" in err


def test_bracket_error_exit_4(tmp_path, capsys):
    cfg = write(tmp_path, "t.toml", '[model]\nkind = "scalar_local"\n[model.nonlinearity]\n'
                                    'kind = "hadeler_rothe"\n[threshold]\nparameter = "s"\n'
                                    'bracket = [0.2, 1.5]\n')
    code, _, _ = run(["threshold", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 4


SPEED_TOML = """
[model]
kind = "scalar_local"
[grid]
length = 100.0
h = 0.2
[run]
t_end = 20.0
sample_dt = 0.25
"""


def test_speed_outputs_are_deterministic(tmp_path, capsys):
    cfg = write(tmp_path, "s.toml", SPEED_TOML)
    bodies = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        code, _, _ = run(["speed", "--config", cfg, "--out", out, "--svg"], capsys)
        assert code == 0
        bodies.append(((out / "track.csv").read_bytes(), (out / "series.csv").read_bytes(),
                       (out / "speed.json").read_bytes()))
        assert (out / "speed.svg").read_text().startswith("<svg")
    assert bodies[0] == bodies[1]
    header = bodies[0][0].decode().splitlines()[0]
    assert header == "t,x,x_over_t"


def test_wave_and_classify(tmp_path, capsys):
    cfg = write(tmp_path, "hr8.toml", '[model]\nkind = "scalar_local"\n[model.nonlinearity]\n'
                                      'kind = "hadeler_rothe"\ns = 8.0\n')
    code, out, _ = run(["classify", "--config", cfg, "--out", tmp_path / "o"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["tail"]["tail_class"] == "pushed"
    code, out, _ = run(["wave", "--config", cfg, "--out", tmp_path / "w", "--svg"], capsys)
    assert code == 0 and (tmp_path / "w" / "wave.csv").read_text().startswith("xi,U\n")


def test_sweep_command(tmp_path, capsys):
    cfg = write(tmp_path, "sw.toml", '[model]\nkind = "scalar_local"\n[model.nonlinearity]\n'
                                     'kind = "hadeler_rothe"\n[sweep]\nparameter = "s"\n'
                                     'values = [0.5, 4.0]\nmeasurements = ["c_star", "verdict"]\n')
    code, _, _ = run(["sweep", "--config", cfg, "--out", tmp_path / "o", "--workers", "2"], capsys)
    lines = (tmp_path / "o" / "sweep.csv").read_text().splitlines()
    assert code == 0 and lines[0] == "s,c_star,verdict,error"
    assert lines[2].startswith("4.0,") and "nonlinear" in lines[2]


def test_preset_command(tmp_path, capsys):
    code, out, _ = run(["preset", "hadeler_rothe_table", "--out", tmp_path / "p"], capsys)
    assert code == 0 and json.loads(out)["max_abs_error"] < 1e-3
    code, _, _ = run(["preset", "hadeler_rothe_table", "--config", tmp_path / "x.toml"], capsys)
    assert code == 2
    with pytest.raises(SystemExit):
        main(["preset", "nonexistent"])
