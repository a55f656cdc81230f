"""Figures for experiment output: budget-difference histogram and sweep plots.

Reads only what the experiment writes (rows and the per-point summary), so the
same functions work on CSV/JSON files from earlier runs.
"""
from __future__ import annotations

import os
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SWEEP_LABELS = {"n": "number of agents $|N|$", "m": "number of options $|X|$", "d": "type domain size $|V_i|$"}


def _num(x) -> float:
    return float(Fraction(str(x)))


def histogram(diffs, path: str, title: str | None = None, bins: int = 40) -> str:
    values = [_num(x) for x in diffs]
    strict = sum(1 for x in values if x < 0) / len(values) if values else 0.0
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.hist(values, bins=bins, color="0.35", edgecolor="white", linewidth=0.4)
    ax.set_xlabel("budget difference (proposed - VCG-budget)")
    ax.set_ylabel("instances")
    ax.set_title(title or f"strictly lower budget: {strict:.1%}", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def sweep_plot(summary, sweep: str, path: str) -> str:
    xs = [p["x"] for p in summary]
    means = [_num(p["mean_diff"]) for p in summary]
    stds = [float(p["stddev_diff"]) for p in summary]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.errorbar(xs, means, yerr=stds, fmt="o-", ms=3, lw=1, capsize=2, color="k")
    ax.axhline(0, color="0.6", lw=0.8, ls="--")
    ax.set_xlabel(SWEEP_LABELS.get(sweep, sweep))
    ax.set_ylabel("mean budget difference")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_report(result, directory: str, stem: str = "experiment", fmt: str = "png") -> list:
    """Write the figures for an ``ExperimentResult`` and return their paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    cfg = result.config
    if cfg.sweep:
        paths.append(sweep_plot(result.summary(), cfg.sweep, os.path.join(directory, f"{stem}_vs_{cfg.sweep}.{fmt}")))
    for x, stats in result.points:
        suffix = "" if x is None else f"_{cfg.sweep}{x}"
        if cfg.sweep and x != result.points[-1][0]:
            continue
        paths.append(histogram(stats.diffs, os.path.join(directory, f"{stem}_hist{suffix}.{fmt}")))
    return paths
