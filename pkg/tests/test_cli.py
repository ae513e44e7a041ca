import json
import os

import pytest

from rotstar.cli import RunConfig, main, parse_config
from rotstar.errors import ConfigError


def _write(path, text):
    path.write_text(text)
    return str(path)


def run(tmp_path, command, config_text, out=None):
    cfg = _write(tmp_path / "run.cfg", config_text)
    argv = [command, "--config", cfg, "--out", str(out or tmp_path)]
    return main(argv)


def test_parse_config_comments_and_errors(tmp_path):
    p = _write(tmp_path / "c.cfg", "a = 1.5  # central value\n\nmodel = ep\n")
    data = parse_config(p)
    assert data == {"a": "1.5", "model": "ep"}
    bad = _write(tmp_path / "bad.cfg", "no equals sign here\n")
    with pytest.raises(ConfigError):
        parse_config(bad)
    with pytest.raises(ConfigError):
        parse_config(str(tmp_path / "missing.cfg"))


def test_runconfig_validation():
    with pytest.raises(ConfigError):
        RunConfig({"model": "xx"})
    with pytest.raises(ConfigError):
        RunConfig({"tol": "-1"})
    with pytest.raises(ConfigError):
        RunConfig({"kappas": "1e-3,2e-3"})  # must start at 0
    with pytest.raises(ConfigError):
        RunConfig({"kappas": "0,2e-3,1e-3"})  # nondecreasing
    with pytest.raises(ConfigError):
        RunConfig({"a": "not-a-number"})
    cfg = RunConfig({"eos": "mystery"})
    with pytest.raises(ConfigError):
        cfg.make_eos()


def test_threads_env_fallback(monkeypatch):
    monkeypatch.setenv("ROTSTAR_THREADS", "3")
    assert RunConfig({}).threads == 3
    assert RunConfig({}, threads=2).threads == 2


def test_radial_outputs(tmp_path, capsys):
    assert run(tmp_path, "radial", "gamma = 1.5\na = 1.0\n") == 0
    star = json.loads((tmp_path / "star.json").read_text())
    assert star["R"] == pytest.approx(3.683769758, rel=1e-6)
    out = capsys.readouterr().out
    assert "radial ep" in out and "FAILED" not in out


def test_radial_flags_degenerate_exponent(tmp_path, capsys):
    gamma = 4.0 / 3.0
    assert run(tmp_path, "radial", f"gamma = {gamma!r}\n") == 0
    out = capsys.readouterr().out
    assert "mass condition FAILED" in out and "gamma=" in out


def test_vp_radial_reports_flux_identity(tmp_path, capsys):
    assert run(tmp_path, "vp-radial", "mu = 0.25\n") == 0
    out = capsys.readouterr().out
    assert "flux-identity residual=" in out
    resid = float(out.split("flux-identity residual=")[1].split()[0])
    assert resid < 1e-7


def test_config_error_exit_code(tmp_path):
    assert run(tmp_path, "radial", "model = bogus\n") == 2


def test_mass_curve_csv_units_header(tmp_path):
    text = "gamma = 1.5\na_min = 0.8\na_max = 1.2\nn_samples = 3\n"
    assert run(tmp_path, "mass-curve", text) == 0
    lines = (tmp_path / "mass_curve.csv").read_text().strip().splitlines()
    assert lines[0] == "a_enthalpy,R_length,M_mass,Mprime_mass_per_enthalpy"
    assert len(lines) == 4


def test_kernel_margin_csv(tmp_path):
    text = "gamma = 1.5\nells = 0,2\nns = 64,128\n"
    assert run(tmp_path, "kernel-margin", text) == 0
    lines = (tmp_path / "kernel_margin.csv").read_text().strip().splitlines()
    assert lines[0] == "l_mode,n_nodes,sigma_min_dimensionless"
    assert len(lines) == 5


def test_perturb_shape_peaks_at_equator(tmp_path):
    assert run(tmp_path, "perturb", "gamma = 1.5\nn = 192\n") == 0
    lines = (tmp_path / "shape.csv").read_text().strip().splitlines()
    assert lines[0] == "theta_rad,boundary_displacement_length"
    disp = [float(l.split(",")[1]) for l in lines[1:]]
    assert disp.index(max(disp)) == len(disp) - 1
    modes = (tmp_path / "modes.csv").read_text().strip().splitlines()
    assert modes[0] == "l_mode,xi_R_length_sq"


def test_perturb_degenerate_exit_code(tmp_path):
    gamma = 4.0 / 3.0
    assert run(tmp_path, "perturb", f"gamma = {gamma!r}\nn = 192\n") == 4


def test_continue_writes_curve(tmp_path):
    text = "gamma = 1.5\nkappas = 0,1e-3\n"
    assert run(tmp_path, "continue", text) == 0
    lines = (tmp_path / "continue.csv").read_text().strip().splitlines()
    assert lines[0].startswith("kappa_intensity,R_eq_length,R_pole_length")
    assert len(lines) == 3
    assert (tmp_path / "solution_k1.000000e-03.json").exists()


def test_continue_cap_leaves_partial_curve(tmp_path, capsys):
    text = "gamma = 1.5\nkappas = 0,0.05\n"
    assert run(tmp_path, "continue", text) == 3
    err = capsys.readouterr().err
    assert "deformation cap" in err
    lines = (tmp_path / "continue.csv").read_text().strip().splitlines()
    assert len(lines) == 2  # header plus the kappa = 0 row
    assert float(lines[1].split(",")[0]) == 0.0


def test_eos_check_json(tmp_path):
    text = "eos = power_sum\nterms = 1:1.5,1:1.8\n"
    assert run(tmp_path, "eos-check", text) == 0
    rep = json.loads((tmp_path / "eos_check.json").read_text())
    assert rep["assumptions"]["passed"]
    assert rep["mass_condition_b"]["passed"]


def test_reruns_are_bit_identical(tmp_path):
    text = "gamma = 1.5\na_min = 0.9\na_max = 1.1\nn_samples = 3\n"
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    assert run(tmp_path, "mass-curve", text, out=d1) == 0
    assert run(tmp_path, "mass-curve", text, out=d2) == 0
    b1 = (d1 / "mass_curve.csv").read_bytes()
    b2 = (d2 / "mass_curve.csv").read_bytes()
    assert b1 == b2


def test_no_temp_files_left(tmp_path):
    assert run(tmp_path, "radial", "gamma = 1.5\n") == 0
    assert not [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]
