"""SVG charts of experiment results (headless, no display server).

Charts can be drawn straight from in-memory results (`render_all`, used
by the experiment driver when `emitSvg` is on) or re-rendered later from
the written CSV artifacts (`render_csv`, used by the command line `plot`
subcommand).  Files are recognized by their header row, not their name.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ConfigurationError

__all__ = ["render_all", "render_csv"]


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def _costs_chart(rows, out_dir: Path) -> Path:
    """rows: (regime, social_mean, social_stderr, total_mean, total_stderr)"""
    regimes = [r[0] for r in rows]
    xs = range(len(regimes))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.bar(xs, [r[3] for r in rows], yerr=[r[4] for r in rows],
            color="tab:blue", capsize=4)
    ax1.set_title("mean total cost per replication")
    ax2.bar(xs, [r[1] for r in rows], yerr=[r[2] for r in rows],
            color="tab:orange", capsize=4)
    ax2.set_title("social cost vs uncontended baseline")
    for ax in (ax1, ax2):
        ax.set_xticks(list(xs))
        ax.set_xticklabels(regimes, rotation=20, ha="right", fontsize=8)
        ax.grid(axis="y", alpha=0.3)
    return _save(fig, out_dir / "costs.svg")


def _utilization_chart(series, out_dir: Path) -> Path:
    """series: {regime: {link: [rho_0, rho_1, ...]}}"""
    n = len(series)
    fig, axes = plt.subplots(1, max(n, 1), figsize=(4 * max(n, 1), 3.2),
                             squeeze=False)
    for ax, (regime, per_link) in zip(axes[0], sorted(series.items())):
        for d in sorted(per_link):
            ax.plot(per_link[d], label=f"link {d}")
        ax.set_title(regime, fontsize=9)
        ax.set_xlabel("step")
        ax.set_ylabel("cumulative share")
        ax.set_ylim(0.0, 1.0)
        ax.legend(fontsize=7)
    return _save(fig, out_dir / "utilization.svg")


def _deviation_chart(series, out_dir: Path) -> Path:
    """series: {regime: [dev_0, dev_1, ...]}"""
    fig, ax = plt.subplots(figsize=(6, 4))
    for regime, vals in sorted(series.items()):
        ax.plot(vals, label=regime)
    ax.set_xlabel("step")
    ax.set_ylabel("average grant-request deviation")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return _save(fig, out_dir / "deviation.svg")


def render_all(results: dict, out_dir: Path) -> list:
    """Draw every chart from {regime: Metrics}; returns written paths."""
    out_dir = Path(out_dir)
    rows = [(name, m.social_mean, m.social_stderr, m.total_mean,
             m.total_stderr) for name, m in results.items()]
    util = {name: {d: m.utilization[d].tolist()
                   for d in range(m.utilization.shape[0])}
            for name, m in results.items()}
    dev = {name: list(m.avg_deviation) for name, m in results.items()}
    return [_costs_chart(rows, out_dir),
            _utilization_chart(util, out_dir),
            _deviation_chart(dev, out_dir)]


# ---------------------------------------------------------------------------
# CSV-driven re-rendering


def _read(path: Path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigurationError(f"{path}: empty file")
        return header, list(reader)


def render_csv(paths, out_dir: Path) -> list:
    """Re-render whichever charts the given CSV artifacts support."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for raw in paths:
        path = Path(raw)
        header, rows = _read(path)
        if header[:7] == ["regime", "replications", "predicted_objective",
                          "social_cost_mean", "social_cost_stderr",
                          "total_cost_mean", "total_cost_stderr"]:
            data = [(r[0], float(r[3]), float(r[4]), float(r[5]), float(r[6]))
                    for r in rows]
            written.append(_costs_chart(data, out_dir))
        elif header == ["regime", "link", "step", "rho"]:
            series: dict = {}
            for regime, link, step, rho in rows:
                series.setdefault(regime, {}).setdefault(int(link), {})[
                    int(step)] = float(rho)
            tidy = {reg: {d: [vals[t] for t in sorted(vals)]
                          for d, vals in per.items()}
                    for reg, per in series.items()}
            written.append(_utilization_chart(tidy, out_dir))
        elif header == ["regime", "step", "avg_deviation"]:
            series = {}
            for regime, step, val in rows:
                series.setdefault(regime, {})[int(step)] = float(val)
            tidy = {reg: [vals[t] for t in sorted(vals)]
                    for reg, vals in series.items()}
            written.append(_deviation_chart(tidy, out_dir))
        else:
            raise ConfigurationError(
                f"{path}: unrecognized artifact header {header[:4]}")
    return written
