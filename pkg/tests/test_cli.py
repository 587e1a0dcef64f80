import math

import numpy as np
import pytest

from frachaos import cli
from frachaos.config import default_theta, load_config, parse_config
from frachaos.errors import ConfigError

WICK = """
# Wick exponential setting
hurst = 0.3
horizon = 1.0
n_cells = 32
b_kind = constant
b_data = 0.5
eta_kind = deterministic
eta_data = 1
n_paths = 100
t_points = 5
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(tmp_path, command, text, out="out", extra=()):
    cfg = write(tmp_path, text)
    return cli.main([command, "--config", cfg, "--out", str(tmp_path / out), *extra])


# configuration ---------------------------------------------------------------


def test_minimal_config_defaults():
    cfg = parse_config("hurst = 0.25\nhorizon = 1\nn_cells = 64\nb_kind = constant\neta_kind = deterministic\n")
    assert cfg.n_max == 12 and cfg.seed == 0
    assert cfg.p == pytest.approx(0.5 * (2 + 1 / 0.25))
    assert 2 < cfg.p_tilde < cfg.p
    assert cfg.theta == pytest.approx(default_theta(0.25, cfg.p))


def test_default_theta_meets_exponent_requirement():
    from frachaos.chaos import continuity_exponent
    from frachaos.fraccalc import FracOrder

    for alpha in (0.05, 0.2, 0.4):
        p = 0.5 * (2 + 1 / alpha)
        assert continuity_exponent(FracOrder(alpha), p, default_theta(alpha, p)) == pytest.approx(1.1)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("hurst = 0.5\n", "hurst must be < 0.5"),
        ("hurst = 0.3\np = 3\np_tilde = 3.5\n", "p_tilde must be < p"),
        ("hurst = 0.3\nbogus = 1\n", "line 2: unknown key 'bogus'"),
        ("hurst = 0.3\nhurst = 0.2\n", "duplicate key"),
        ("hurst = 0.3\nn_cells = many\n", "line 2: cannot parse n_cells"),
        ("hurst = 0.3\njust words\n", "line 2: expected 'key = value'"),
        ("horizon = 1\n", "missing required key 'hurst'"),
        ("hurst = 0.3\np = 9\n", "p must lie in (2, 1/alpha)"),
        ("hurst = 0.3\neta_kind = magic\n", "eta_kind must be one of"),
    ],
)
def test_config_errors(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert needle in str(exc.value)
    assert "\n" not in str(exc.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


# commands --------------------------------------------------------------------


@pytest.mark.parametrize(
    "command,files",
    [
        ("fracint", ["fracint.csv", "fracint.png"]),
        ("simulate", ["paths.csv", "paths.png"]),
        ("moments", ["moments.csv", "moments.png"]),
        ("solve", ["solution.csv", "kernels.csv", "solution.png"]),
    ],
)
def test_commands_are_byte_identical_on_rerun(tmp_path, command, files):
    assert run(tmp_path, command, WICK, "a") == 0
    assert run(tmp_path, command, WICK, "b") == 0
    for name in files:
        assert (tmp_path / "a" / name).exists()
        if name.endswith(".csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    manifest = (tmp_path / "a" / f"{command}.manifest.txt").read_text()
    assert f"command: {command}" in manifest
    assert "seed: 0" in manifest and "version: " in manifest and "wall_clock_seconds: " in manifest


def test_seed_override(tmp_path):
    assert run(tmp_path, "simulate", WICK, "a", ["--seed", "5"]) == 0
    assert run(tmp_path, "simulate", WICK, "b") == 0
    assert (tmp_path / "a" / "paths.csv").read_bytes() != (tmp_path / "b" / "paths.csv").read_bytes()
    assert "seed: 5" in (tmp_path / "a" / "simulate.manifest.txt").read_text()


def test_csv_schema_and_encoding(tmp_path):
    assert run(tmp_path, "moments", WICK) == 0
    lines = (tmp_path / "out" / "moments.csv").read_text().splitlines()
    assert lines[0] == "t,mean,second_moment,tail_flag"
    t, mean, second, flag = lines[-1].split(",")
    assert float(second) == pytest.approx(math.exp(0.25), rel=1e-6)
    assert float(repr(float(second))) == float(second)
    assert flag == "1"
    assert run(tmp_path, "solve", WICK) == 0
    assert (tmp_path / "out" / "solution.csv").read_text().splitlines()[0] == "t,path_id,X_t"


def test_moments_without_noise(tmp_path):
    text = WICK.replace("b_data = 0.5", "b_data = 0").replace("eta_data = 1", "eta_data = 2")
    text += "a_kind = polynomial\na_coefficients = 0.5, 1\n"
    assert run(tmp_path, "moments", text) == 0
    rows = np.loadtxt(tmp_path / "out" / "moments.csv", delimiter=",", skiprows=1)
    t = rows[:, 0]
    np.testing.assert_allclose(rows[:, 2], 4 * np.exp(2 * (0.5 * t + 0.5 * t**2)), rtol=1e-12)


def test_check_finite_chaos_passes(tmp_path):
    text = WICK.replace("eta_kind = deterministic", "eta_kind = finite-chaos").replace(
        "eta_data = 1", "eta_data = 1, 0.5, 0.2\neta_phi = 1, 1"
    )
    assert run(tmp_path, "check", text) == 0
    report = (tmp_path / "out" / "check.txt").read_text().splitlines()
    assert report[0] == "verdict: pass"
    assert (tmp_path / "out" / "check_terms.csv").exists()


def test_check_critical_sequence_fails_with_code_2(tmp_path):
    text = WICK.replace("eta_kind = deterministic", "eta_kind = norm-sequence").replace("eta_data = 1", "eta_data = critical")
    assert run(tmp_path, "check", text) == 2
    assert (tmp_path / "out" / "check.txt").read_text().startswith("verdict: fail")


def test_config_error_exit_code(tmp_path, capsys):
    assert run(tmp_path, "moments", "hurst = 0.5\n") == 1
    err = capsys.readouterr().err.strip()
    assert err == "frachaos: error: hurst must be < 0.5"


def test_too_few_paths(tmp_path, capsys):
    assert run(tmp_path, "solve", WICK.replace("n_paths = 100", "n_paths = 99")) == 1
    assert "n_paths" in capsys.readouterr().err


def test_non_finite_output_aborts(tmp_path, capsys):
    text = WICK + "a_kind = polynomial\na_coefficients = 1e300\n"
    assert run(tmp_path, "moments", text) == 1
    assert "non-finite" in capsys.readouterr().err
    assert not (tmp_path / "out" / "moments.csv").exists()


def test_norm_sequence_has_no_kernels(tmp_path):
    text = WICK.replace("eta_kind = deterministic", "eta_kind = norm-sequence").replace("eta_data = 1", "eta_data = exponential 2")
    assert run(tmp_path, "moments", text) == 1
    assert run(tmp_path, "check", text) == 0


def test_phi_given_diffusion(tmp_path):
    text = WICK.replace("b_kind = constant", "b_kind = phi-given").replace("b_data = 0.5", "b_data = 1, 0.5")
    assert run(tmp_path, "moments", text) == 0


def test_run_command_returns_manifest(tmp_path):
    cfg = parse_config(WICK)
    man = cli.run_command("fracint", cfg, tmp_path)
    assert man.rows["fracint.csv"] == 33
    assert man.exit_code == 0
    with pytest.raises(ConfigError):
        cli.run_command("explode", cfg, tmp_path)
