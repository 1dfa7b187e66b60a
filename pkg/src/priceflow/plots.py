"""Figure rendering for the report paths, plus optional gnuplot emission."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["price_figure", "comparison_figure", "write_gnuplot_script"]

_STYLE = {
    "figure.dpi": 150,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.3,
}


def price_figure(trajs, path):
    """Price and transaction rate against time, one line per method."""
    with plt.rc_context(_STYLE):
        fig, (ax_p, ax_l) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
        for traj in trajs:
            ax_p.plot(traj.times, traj.prices, label=traj.method)
            ax_l.plot(traj.times, traj.rates, label=traj.method)
        ax_p.set_xscale("log")
        ax_p.set_ylabel("price p(t)")
        ax_p.legend()
        ax_l.set_xscale("log")
        ax_l.set_xlabel("t")
        ax_l.set_ylabel("rate lambda(t)")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def comparison_figure(times, p_heat, p_fd, path):
    """Overlay of both methods plus the absolute gap between them."""
    times = np.asarray(times)
    gap = np.abs(np.asarray(p_heat) - np.asarray(p_fd))
    with plt.rc_context(_STYLE):
        fig, (ax, ax_gap) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
        ax.plot(times, p_heat, label="heat-transform")
        ax.plot(times, p_fd, "--", label="fd-reference")
        ax.set_xscale("log")
        ax.set_ylabel("price p(t)")
        ax.legend()
        ax_gap.plot(times, np.maximum(gap, 1e-18))
        ax_gap.set_xscale("log")
        ax_gap.set_yscale("log")
        ax_gap.set_xlabel("t")
        ax_gap.set_ylabel("|p_heat - p_fd|")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def write_gnuplot_script(path, csv_name: str):
    """Small gnuplot companion for the trajectory CSV."""
    lines = [
        "set datafile separator ','",
        "set logscale x",
        "set xlabel 't'",
        "set ylabel 'p(t)'",
        "set key autotitle columnhead",
        f"plot '{csv_name}' using 1:2 with linespoints",
        "pause -1",
    ]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
