"""Figure rendering for the compare/bench report paths.

Figures are written next to the delimited output; everything goes through
the Agg backend so the CLI stays headless.
"""

from __future__ import annotations

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _group_means(rows, value_key):
    """{(budget, algo): mean value} over successful rows."""
    acc = defaultdict(list)
    for r in rows:
        if r.get("error"):
            continue
        acc[(r["budget"], r["algorithm"])].append(r[value_key])
    return {k: sum(v) / len(v) for k, v in acc.items()}


def compare_figures(rows, out_dir: str) -> list[str]:
    """Grouped-bar charts of mean energy cost and mean travel time per
    algorithm and budget.  Returns the written paths."""
    written = []
    for value_key, ylabel, fname in (
            ("energy_cost", "mean energy cost ($)", "energy_cost.png"),
            ("travel_time", "mean travel time (h)", "travel_time.png")):
        means = _group_means(rows, value_key)
        if not means:
            continue
        budgets = sorted({b for b, _ in means})
        algos = sorted({a for _, a in means})
        fig, ax = plt.subplots(figsize=(7, 4))
        width = 0.8 / len(algos)
        for i, algo in enumerate(algos):
            xs = [j + i * width for j in range(len(budgets))]
            ys = [means.get((b, algo), float("nan")) for b in budgets]
            ax.bar(xs, ys, width=width, label=algo)
        ax.set_xticks([j + 0.4 - width / 2 for j in range(len(budgets))])
        ax.set_xticklabels([f"{b:g} kWh" for b in budgets])
        ax.set_xlabel("energy budget")
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, fname)
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def bench_figure(samples: dict[str, list[float]], out_dir: str) -> str:
    """Box plot of per-query wall times by algorithm."""
    fig, ax = plt.subplots(figsize=(6, 4))
    algos = sorted(samples)
    ax.boxplot([samples[a] for a in algos], tick_labels=algos)
    ax.set_ylabel("query wall time (s)")
    ax.set_yscale("log")
    fig.tight_layout()
    path = os.path.join(out_dir, "runtimes.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
