"""Render ``curves.csv`` as an SVG chart: one panel per snapshot, one line per mode."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiment import CSV_HEADER  # noqa: E402

STYLE = {
    "active-learning": ("tab:green", "-"),
    "active-teaching": ("tab:blue", "-"),
    "active-teaching+active-learning": ("tab:orange", "-"),
    "adaptive-teaching": ("tab:blue", "--"),
    "adaptive-teaching+active-learning": ("tab:orange", "--"),
}


def read_curves(path) -> dict[int, dict[str, list[tuple[int, float, float, float]]]]:
    """Parse curves.csv into {snapshot: {mode: [(step, mean, low, high), ...]}}."""
    with Path(path).open(newline="") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        panels: dict[int, dict[str, list]] = defaultdict(lambda: defaultdict(list))
        for row in csv.reader(fh):
            mode, snap, step, mean, low, high = row
            panels[int(snap)][mode].append((int(step), float(mean), float(low), float(high)))
    return {k: dict(v) for k, v in sorted(panels.items())}


def plot_curves(csv_path, svg_path) -> Path:
    panels = read_curves(csv_path)
    if not panels:
        raise ValueError(f"{csv_path}: no curve rows")
    plt.rcParams["svg.hashsalt"] = "coteach"
    fig, axes = plt.subplots(1, len(panels), figsize=(4.5 * len(panels), 3.8), sharey=True, squeeze=False)
    for ax, (snap, modes) in zip(axes[0], panels.items()):
        ax.set_gid(f"panel-snapshot-{snap}")
        for mode, rows in modes.items():
            rows.sort()
            steps = [r[0] for r in rows]
            color, ls = STYLE.get(mode, ("gray", "-"))
            ax.fill_between(steps, [r[2] for r in rows], [r[3] for r in rows], color=color, alpha=0.15, linewidth=0)
            ax.plot(steps, [r[1] for r in rows], color=color, linestyle=ls, label=mode)
        ax.set_title(f"{snap - 1} prior group interactions" if snap > 1 else "no prior group interactions")
        ax.set_xlabel("interaction step")
        ax.set_ylim(0, 102)
        ax.grid(alpha=0.3)
    axes[0][0].set_ylabel("% students correct")
    axes[0][-1].legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    svg_path = Path(svg_path)
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return svg_path
