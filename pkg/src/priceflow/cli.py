"""Command-line front end: simulation drivers, CSV emission, reports.

Subcommands: simulate, fd, field, dump-transform, asympt, compare.  Every
command takes --config PATH (TOML, see config.KNOWN_KEYS) and --out DIR.
Exit codes: 0 success, 2 configuration problem, 3 solver failure; errors
print one machine-readable line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .asymptotics import (
    DegenerateMasses,
    InsufficientPoints,
    NotZeroMass,
    ZeroDatum,
    classify_law,
    fit_sqrt_coefficient,
)
from .config import ParseError, RunConfig, UnknownKey, ValidationError, parse_config
from .datum import ZeroMassPairError, masses
from .heatflow import NonpositiveTime
from .pricepath import BracketFailure, PricePoint, PriceTrajectory, trajectory
from .refsolver import DomainTooSmall, GridTooCoarse, Instability, solve
from .transform import forward_transform

CONFIG_ERRORS = (ParseError, UnknownKey, ValidationError)
SOLVER_ERRORS = (
    BracketFailure,
    Instability,
    DomainTooSmall,
    GridTooCoarse,
    NonpositiveTime,
    DegenerateMasses,
    NotZeroMass,
    ZeroDatum,
    ZeroMassPairError,
    InsufficientPoints,
)

TRAJECTORY_HEADER = "t,p,lambda,method"


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_rows(path: Path, header: str, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_trajectory_csv(path: Path, trajs):
    rows = []
    for traj in trajs:
        for pt in traj.points:
            rows.append((_fmt(pt.t), _fmt(pt.p), _fmt(pt.lam), traj.method))
    _write_rows(path, TRAJECTORY_HEADER, rows)


def read_trajectory_csv(path) -> PriceTrajectory:
    """Load a trajectory written by this tool (first method block)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRAJECTORY_HEADER.split(","):
            raise ValidationError(
                f"{path}: expected header {TRAJECTORY_HEADER!r}, got {reader.fieldnames}"
            )
        points = []
        method = None
        for row in reader:
            if method is None:
                method = row["method"]
            if row["method"] != method:
                break
            t, p, lam = float(row["t"]), float(row["p"]), float(row["lambda"])
            points.append(PricePoint(t=t, p=p, lam=lam, bracket=(p, p)))
    return PriceTrajectory(points=tuple(points), method=method or "unknown", fingerprint="csv")


def _heat_trajectory(cfg: RunConfig, times) -> PriceTrajectory:
    return trajectory(cfg.heat_field(), times, xtol=cfg.xtol)


def _fd_trajectory(cfg: RunConfig, times):
    T = float(times[-1])
    return solve(cfg.datum, cfg.fd_grid(), T, times, dt_growth=cfg.dt_growth)


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    times = cfg.resolve_times()
    trajs = []
    if cfg.method in ("heat", "both"):
        trajs.append(_heat_trajectory(cfg, times))
    if cfg.method in ("fd", "both"):
        trajs.append(_fd_trajectory(cfg, times)[0])
    csv_path = out / "trajectory.csv"
    write_trajectory_csv(csv_path, trajs)
    print(f"wrote {csv_path}")
    if cfg.plot:
        from .plots import price_figure

        fig_path = out / "trajectory.png"
        price_figure(trajs, fig_path)
        print(f"wrote {fig_path}")
    if cfg.gnuplot:
        from .plots import write_gnuplot_script

        write_gnuplot_script(out / "trajectory.gp", csv_path.name)
        print(f"wrote {out / 'trajectory.gp'}")
    return 0


def cmd_fd(cfg: RunConfig, out: Path) -> int:
    times = cfg.resolve_times()
    traj, snapshots = _fd_trajectory(cfg, times)
    csv_path = out / "trajectory.csv"
    write_trajectory_csv(csv_path, [traj])
    print(f"wrote {csv_path}")
    for i, st in enumerate(snapshots):
        snap_path = out / f"snapshot_{i:04d}_t{st.t:g}.csv"
        _write_rows(
            snap_path,
            "x,f",
            ((_fmt(x), _fmt(f)) for x, f in zip(st.x, st.f)),
        )
    print(f"wrote {len(snapshots)} snapshots")
    if cfg.plot:
        from .plots import price_figure

        price_figure([traj], out / "trajectory.png")
        print(f"wrote {out / 'trajectory.png'}")
    return 0


def cmd_field(cfg: RunConfig, out: Path) -> int:
    hf = cfg.heat_field()
    xs = np.linspace(cfg.x_min, cfg.x_max, cfg.x_count)
    rows = []
    for t in cfg.resolve_times():
        for x in xs:
            rows.append(
                (_fmt(x), _fmt(t), _fmt(hf.value(x, t)), _fmt(hf.slope(x, t)))
            )
    path = out / "field.csv"
    _write_rows(path, "x,t,F,Fx", rows)
    print(f"wrote {path}")
    return 0


def cmd_dump_transform(cfg: RunConfig, out: Path) -> int:
    tf = forward_transform(cfg.datum)
    xs = np.linspace(cfg.x_min, cfg.x_max, cfg.x_count)
    vals = tf(xs)
    path = out / "transform.csv"
    _write_rows(path, "x,F", ((_fmt(x), _fmt(v)) for x, v in zip(xs, vals)))
    print(f"wrote {path}")
    return 0


def cmd_asympt(cfg: RunConfig, out: Path, trajectory_csv: str | None) -> int:
    law = classify_law(cfg.datum)
    m = masses(cfg.datum)
    print(f"masses: m_plus={_fmt(m.m_plus)} m_minus={_fmt(m.m_minus)}")
    print(f"kind: {law.kind}")
    if law.kind == "sqrt-drift":
        print(f"q_inf: {_fmt(law.q_inf)}")
    else:
        print(f"p_inf: {_fmt(law.p_inf)}")
    if trajectory_csv is not None:
        traj = read_trajectory_csv(trajectory_csv)
        window = cfg.fit_window()
        q_hat, resid = fit_sqrt_coefficient(traj, window)
        print(
            f"fit over [{window[0]:g}, {window[1]:g}]: "
            f"q_hat={_fmt(q_hat)} residual={_fmt(resid)}"
        )
    return 0


def cmd_compare(cfg: RunConfig, out: Path) -> int:
    times = cfg.resolve_times()
    heat = _heat_trajectory(cfg, times)
    fd = _fd_trajectory(cfg, times)[0]
    write_trajectory_csv(out / "trajectory.csv", [heat, fd])

    gap = np.abs(heat.prices - fd.prices)
    rows = (
        (_fmt(t), _fmt(ph), _fmt(pf), _fmt(g))
        for t, ph, pf, g in zip(times, heat.prices, fd.prices, gap)
    )
    _write_rows(out / "comparison.csv", "t,p_heat,p_fd,abs_diff", rows)

    max_gap = float(np.max(gap))
    rms_gap = float(np.sqrt(np.mean(gap * gap)))
    passed = max_gap <= cfg.gate
    report = [
        f"samples: {len(times)}",
        f"t_range: [{_fmt(float(times[0]))}, {_fmt(float(times[-1]))}]",
        f"max_abs_dp: {_fmt(max_gap)}",
        f"rms_dp: {_fmt(rms_gap)}",
        f"gate: {_fmt(cfg.gate)}",
        f"gate_pass: {'true' if passed else 'false'}",
    ]
    report_path = out / "report.txt"
    with open(report_path, "w", newline="\n") as fh:
        fh.write("\n".join(report) + "\n")
    print("\n".join(report))
    print(f"wrote {report_path}")

    if cfg.plot:
        from .plots import comparison_figure, price_figure

        comparison_figure(times, heat.prices, fd.prices, out / "comparison.png")
        price_figure([heat, fd], out / "trajectory.png")
        print(f"wrote {out / 'comparison.png'}")
    if cfg.gnuplot:
        from .plots import write_gnuplot_script

        write_gnuplot_script(out / "trajectory.gp", "trajectory.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="priceflow",
        description="Free boundary price formation: transform and FD solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "simulate": "price trajectory with the configured method(s)",
        "fd": "finite-difference run with density snapshots",
        "field": "CSV grid of the evolved profile and its slope",
        "dump-transform": "CSV of the folded initial profile",
        "asympt": "long-time law and optional empirical fit",
        "compare": "cross-method run with deviation report and figures",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="TOML configuration file")
        p.add_argument("--out", metavar="DIR", help="output directory (default '.')")
        if name == "asympt":
            p.add_argument(
                "--trajectory",
                metavar="CSV",
                help="trajectory CSV to fit the sqrt law against",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            text = Path(args.config).read_text()
        else:
            text = ""
        cfg = parse_config(text)
    except OSError as exc:
        print(f"PRICEFLOW_ERROR kind=ConfigRead detail={exc}", file=sys.stderr)
        return 2
    except CONFIG_ERRORS as exc:
        print(f"PRICEFLOW_ERROR kind={type(exc).__name__} detail={exc}", file=sys.stderr)
        return 2

    out = Path(args.out) if args.out is not None else Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    try:
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "fd":
            return cmd_fd(cfg, out)
        if args.command == "field":
            return cmd_field(cfg, out)
        if args.command == "dump-transform":
            return cmd_dump_transform(cfg, out)
        if args.command == "asympt":
            return cmd_asympt(cfg, out, args.trajectory)
        if args.command == "compare":
            return cmd_compare(cfg, out)
        raise AssertionError(f"unhandled command {args.command}")
    except CONFIG_ERRORS as exc:
        print(f"PRICEFLOW_ERROR kind={type(exc).__name__} detail={exc}", file=sys.stderr)
        return 2
    except SOLVER_ERRORS as exc:
        print(f"PRICEFLOW_ERROR kind={type(exc).__name__} detail={exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
