import numpy as np
import pytest

from priceflow.cli import main, read_trajectory_csv
from priceflow.config import (
    ParseError,
    UnknownKey,
    ValidationError,
    parse_config,
)

FAST_FD = """
datum = "skew"
method = "fd"
L = 15.0
n = 1500
times = [0.25, 0.5, 1.0]
plot = false
"""


# -- config parsing -----------------------------------------------------------


def test_minimal_config_defaults():
    cfg = parse_config('datum = "tent"')
    assert cfg.datum_name == "tent"
    assert cfg.method == "heat"
    assert cfg.xtol == 1e-8
    assert cfg.tail_tolerance == 1e-10
    assert cfg.L == 30.0
    assert cfg.n == 15000
    assert cfg.scheme == "implicit"
    assert cfg.datum is not None
    # log-spaced default grid: 20 points per decade over [0.1, 10]
    ts = cfg.resolve_times()
    assert ts[0] == pytest.approx(0.1)
    assert ts[-1] == pytest.approx(10.0)
    assert len(ts) == 41


def test_empty_config_is_all_defaults():
    cfg = parse_config("")
    assert cfg.datum_name == "tent"
    assert cfg.method == "heat"


def test_custom_requires_all_fields():
    with pytest.raises(ValidationError):
        parse_config('datum = "custom"\nvalues = [1.0, -1.0]\np0 = 0.0\na = 1.0')


def test_custom_datum_built():
    cfg = parse_config(
        'datum = "custom"\nknots = [-1.0, 0.0, 1.0]\nvalues = [2.0, 0.0, -2.0]\n'
        "p0 = 0.0\na = 0.5"
    )
    assert cfg.datum.a == 0.5
    assert cfg.datum(-0.5) == 1.0


def test_custom_datum_sign_violation_becomes_validation_error():
    with pytest.raises(ValidationError):
        parse_config(
            'datum = "custom"\nknots = [-1.0, 0.0, 1.0]\nvalues = [-1.0, 0.0, 1.0]\n'
            "p0 = 0.0\na = 1.0"
        )


def test_unknown_key_rejected():
    with pytest.raises(UnknownKey):
        parse_config("datum_name = 'tent'")


def test_bad_toml_syntax():
    with pytest.raises(ParseError):
        parse_config("datum = tent =")


def test_preset_rejects_custom_keys():
    with pytest.raises(ValidationError):
        parse_config('datum = "tent"\nknots = [0.0, 1.0]')


def test_times_exclusive_with_log_spec():
    with pytest.raises(ValidationError):
        parse_config("times = [1.0, 2.0]\nt_min = 0.5")
    with pytest.raises(ValidationError):
        parse_config("times = [2.0, 1.0]")
    with pytest.raises(ValidationError):
        parse_config("times = [0.0, 1.0]")
    with pytest.raises(ValidationError):
        parse_config("t_min = -1.0")


def test_full_skew_both_config():
    text = (
        'datum = "skew"\nmethod = "both"\nt_min = 0.1\nt_max = 5.0\n'
        "t_count = 50\ngate = 5e-2\nn = 2000\nL = 20.0"
    )
    cfg = parse_config(text)
    assert cfg.method == "both"
    assert cfg.gate == 5e-2
    assert len(cfg.resolve_times()) == 50
    grid = cfg.fd_grid()
    assert grid.h == pytest.approx(0.02)
    assert grid.dt == pytest.approx(0.005)  # h/4 implicit default


def test_explicit_scheme_dt_default():
    cfg = parse_config('scheme = "explicit"\nn = 1000\nL = 10.0')
    assert cfg.resolve_dt() == pytest.approx(0.4 * 0.02 * 0.02)


def test_shipped_example_config_parses():
    from pathlib import Path

    text = Path(__file__).resolve().parents[1].joinpath("configs/skew_both.toml").read_text()
    cfg = parse_config(text)
    assert cfg.method == "both"
    assert cfg.datum_name == "skew"


# -- CLI commands --------------------------------------------------------------


def write_config(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return str(path)


def test_simulate_tent_prices_zero(tmp_path, capsys):
    cfg = write_config(
        tmp_path, 'datum = "tent"\ntimes = [0.1, 1.0, 10.0]\nplot = false'
    )
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,p,lambda,method"
    for line in lines[1:]:
        t, p, lam, method = line.split(",")
        assert abs(float(p)) <= 1e-8
        assert float(lam) > 0.0
        assert method == "heat-transform"


def test_simulate_deterministic_bytes(tmp_path):
    cfg = write_config(
        tmp_path, 'datum = "skew"\ntimes = [0.5, 1.0, 2.0]\nplot = false'
    )
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(["simulate", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(out2)]) == 0
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()


def test_fd_command_writes_snapshots(tmp_path):
    cfg = write_config(tmp_path, FAST_FD)
    rc = main(["fd", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,p,lambda,method"
    assert all(line.endswith("fd-reference") for line in lines[1:])
    snaps = sorted(tmp_path.glob("snapshot_*.csv"))
    assert len(snaps) == 3
    snap_lines = snaps[0].read_text().splitlines()
    assert snap_lines[0] == "x,f"
    assert len(snap_lines) == 1500 + 2  # n+1 nodes plus header


def test_compare_command_report_and_figures(tmp_path):
    cfg = write_config(
        tmp_path,
        'datum = "skew"\nmethod = "both"\nL = 15.0\nn = 1500\n'
        "times = [0.25, 0.5, 1.0]\ngate = 5e-2",
    )
    rc = main(["compare", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    report = (tmp_path / "report.txt").read_text()
    assert "gate_pass: true" in report
    assert "max_abs_dp" in report
    comparison = (tmp_path / "comparison.csv").read_text().splitlines()
    assert comparison[0] == "t,p_heat,p_fd,abs_diff"
    assert len(comparison) == 4
    # report path renders figures alongside the delimited output
    assert (tmp_path / "comparison.png").stat().st_size > 0
    assert (tmp_path / "trajectory.png").stat().st_size > 0
    # both methods live in one trajectory file
    traj = read_trajectory_csv(tmp_path / "trajectory.csv")
    assert traj.method == "heat-transform"


def test_field_command(tmp_path):
    cfg = write_config(
        tmp_path,
        'datum = "tent"\ntimes = [0.5, 1.0]\nx_min = -2.0\nx_max = 2.0\nx_count = 5',
    )
    rc = main(["field", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "field.csv").read_text().splitlines()
    assert lines[0] == "x,t,F,Fx"
    assert len(lines) == 1 + 2 * 5
    x, t, F, Fx = map(float, lines[3].split(","))  # x = 0 row at t = 0.5
    assert x == 0.0 and t == 0.5
    assert abs(F) <= 1e-10  # odd symmetry
    assert Fx < 0.0


def test_dump_transform_command(tmp_path, tent_field):
    cfg = write_config(
        tmp_path, 'datum = "tent"\nx_min = -3.0\nx_max = 3.0\nx_count = 7'
    )
    rc = main(["dump-transform", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "transform.csv").read_text().splitlines()
    assert lines[0] == "x,F"
    for line in lines[1:]:
        x, F = map(float, line.split(","))
        assert F == pytest.approx(tent_field(x), abs=1e-15)


def test_asympt_command(tmp_path, capsys):
    cfg = write_config(tmp_path, 'datum = "skew"')
    rc = main(["asympt", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "kind: sqrt-drift" in captured
    assert "q_inf: 0.60914" in captured

    cfg2 = write_config(tmp_path, 'datum = "zero-mass-asym"')
    main(["asympt", "--config", cfg2, "--out", str(tmp_path)])
    captured = capsys.readouterr().out
    assert "kind: bounded-limit" in captured
    assert "p_inf: 0.333333" in captured


def test_asympt_fit_from_trajectory_csv(tmp_path, capsys):
    sim_cfg = write_config(
        tmp_path, 'datum = "skew"\ntimes = [100.0, 400.0, 1600.0]\nplot = false'
    )
    assert main(["simulate", "--config", sim_cfg, "--out", str(tmp_path)]) == 0
    fit_cfg = write_config(
        tmp_path, 'datum = "skew"\nfit_t_min = 100.0\nfit_t_max = 1600.0'
    )
    rc = main(
        [
            "asympt",
            "--config",
            fit_cfg,
            "--out",
            str(tmp_path),
            "--trajectory",
            str(tmp_path / "trajectory.csv"),
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "q_hat=" in out
    q_hat = float(out.split("q_hat=")[1].split()[0])
    assert q_hat == pytest.approx(0.609, rel=0.05)


def test_exit_2_on_config_errors(tmp_path, capsys):
    bad = write_config(tmp_path, "nonsense_key = 1")
    assert main(["simulate", "--config", bad, "--out", str(tmp_path)]) == 2
    assert "PRICEFLOW_ERROR kind=UnknownKey" in capsys.readouterr().err

    assert main(["simulate", "--config", str(tmp_path / "missing.toml")]) == 2
    assert "PRICEFLOW_ERROR kind=ConfigRead" in capsys.readouterr().err

    bad_datum = write_config(tmp_path, 'datum = "custom"')
    assert main(["simulate", "--config", bad_datum, "--out", str(tmp_path)]) == 2
    assert "PRICEFLOW_ERROR kind=ValidationError" in capsys.readouterr().err


def test_exit_3_on_unstable_explicit_dt(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        'datum = "tent"\nmethod = "fd"\nscheme = "explicit"\ndt = 0.1\n'
        "L = 15.0\nn = 1500\ntimes = [0.5]\nplot = false",
    )
    assert main(["fd", "--config", cfg, "--out", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert "PRICEFLOW_ERROR kind=Instability" in err


def test_exit_3_on_bracket_failure(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        'datum = "custom"\nknots = [-2.0, -1.0]\nvalues = [1.0, 2.0]\n'
        "p0 = 0.0\na = 1.0\ntimes = [1.0]\nplot = false",
    )
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert "PRICEFLOW_ERROR kind=BracketFailure" in capsys.readouterr().err
