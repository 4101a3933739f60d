"""Render the figure targets' CSV data as PNG line plots."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def render_lines(
    rows: list[dict],
    x: str,
    y: str,
    series: tuple[str, ...],
    out_png: str | Path,
    xlabel: str,
    ylabel: str,
    title: str,
) -> Path:
    """One line per distinct combination of the ``series`` columns.

    Infinite/missing y values break the line rather than plotting.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    keys = sorted({tuple(r[s] for s in series) for r in rows})
    for key in keys:
        pts = [(r[x], r[y]) for r in rows if tuple(r[s] for s in series) == key]
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [p[1] if p[1] == p[1] and p[1] != float("inf") else float("nan") for p in pts]
        label = ", ".join(f"{s}={v:g}" if isinstance(v, float) else f"{s}={v}" for s, v in zip(series, key))
        ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.2, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if keys and series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png
