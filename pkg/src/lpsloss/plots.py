"""Figure rendering for the command-line reports.

Every function draws one figure and saves it to the given path; nothing
is shown interactively. The Agg backend is forced so the commands work
headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .simulate import CouplingReport, SimEstimates
from .table1 import THRESHOLD, Table1Row, cells


def save_occupancy_plot(analytic: dict[str, tuple[float, ...]],
                        estimate: SimEstimates | None,
                        path: str | Path) -> Path:
    """Grouped bars of occupancy by level: one group per analytic
    selector, plus the simulated estimate with its CI when given."""
    path = Path(path)
    series = list(analytic.items())
    if estimate is not None:
        series.append(("simulated", estimate.occupancy))
    if not series:
        raise ValueError("nothing to plot")
    n_levels = len(series[0][1])
    x = np.arange(n_levels)
    width = 0.8 / len(series)

    fig, ax = plt.subplots(figsize=(7, 4))
    for j, (label, probs) in enumerate(series):
        pos = x + (j - (len(series) - 1) / 2) * width
        bars = ax.bar(pos, probs, width, label=label)
        if estimate is not None and label == "simulated":
            err = [h if np.isfinite(h) else 0.0
                   for h in estimate.occupancy_ci_half]
            ax.errorbar(pos, probs, yerr=err, fmt="none", ecolor="black",
                        capsize=3, linewidth=1)
    ax.set_xticks(x)
    ax.set_xlabel("jobs in system")
    ax.set_ylabel("stationary probability")
    ax.set_title("Occupancy by level")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_idle_plot(idle: np.ndarray, lam: float | None,
                   path: str | Path) -> Path:
    """Histogram of idle-period lengths with the exponential density
    overlaid when the arrival rate is constant."""
    path = Path(path)
    idle = np.asarray(idle, dtype=float)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(idle, bins=60, density=True, alpha=0.7, label="observed")
    if lam is not None and lam > 0 and len(idle):
        xs = np.linspace(0, float(idle.max()), 200)
        ax.plot(xs, lam * np.exp(-lam * xs), "k-", linewidth=1.5,
                label=f"exponential rate {lam:g}")
    ax.set_xlabel("idle period length")
    ax.set_ylabel("density")
    ax.set_title(f"Idle periods (samples: {len(idle)})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_coupling_plot(report: CouplingReport, path: str | Path) -> Path:
    """Capped vs uncapped-folded time-average occupancy, which coincide
    whenever the cap identity holds on the whole path."""
    path = Path(path)
    x = np.arange(report.n + 1)
    width = 0.35
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(x - width / 2, report.occupancy_capped, width, label="capped")
    ax.bar(x + width / 2, report.occupancy_uncapped, width,
           label="uncapped, folded at n")
    ax.set_xticks(x)
    ax.set_xlabel("jobs in system (uncapped folded at n)")
    ax.set_ylabel("time-average fraction")
    ax.set_title(f"Coupled run: {report.events} events, "
                 f"{report.violations} violations")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_table_deviation_plot(rows: list[Table1Row], path: str | Path) -> Path:
    """Absolute deviation of every recomputed cell from its recorded
    value, with the flagging threshold drawn in."""
    path = Path(path)
    recs = cells(rows)
    labels = [f"{c.row}.{c.col}" for c in recs]
    devs = [c.abs_dev for c in recs]
    colors = ["firebrick" if c.flag else "steelblue" for c in recs]

    fig, ax = plt.subplots(figsize=(12, 4))
    ax.bar(range(len(recs)), devs, color=colors)
    ax.axhline(THRESHOLD, color="black", linewidth=1, linestyle="--",
               label=f"threshold {THRESHOLD}")
    ax.set_xticks(range(len(recs)))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_xlabel("cell (row.column)")
    ax.set_ylabel("absolute deviation")
    ax.set_yscale("log")
    ax.set_ylim(bottom=1e-6)
    ax.set_title("Recomputed vs recorded loss probabilities")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
