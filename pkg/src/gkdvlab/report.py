"""SVG line plots rendered next to the CSV artifacts of a run.

CSV is the contract; these figures are a convenience for eyeballing a run.
Each numeric CSV with a leading time-like column becomes one figure, on a
log axis when the values span several decades.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_csv_plot", "render_run_plots"]


def _read_csv(path: Path):
    with open(path) as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 2:
        return None, None
    header = rows[0]
    try:
        data = np.array([[float(v) if v else np.nan for v in r] for r in rows[1:]])
    except ValueError:
        return None, None
    return header, data


def render_csv_plot(csv_path, svg_path=None) -> Path:
    """Render one CSV as a line plot; returns the SVG path."""
    csv_path = Path(csv_path)
    svg_path = Path(svg_path) if svg_path else csv_path.with_suffix(".svg")
    header, data = _read_csv(csv_path)
    if header is None or data.shape[0] < 2 or data.shape[1] < 2:
        raise ValueError(f"{csv_path}: nothing plottable")
    x, ys = data[:, 0], data[:, 1:]
    fig, ax = plt.subplots(figsize=(6.0, 3.7))
    for j, label in enumerate(header[1:]):
        ax.plot(x, ys[:, j], label=label, lw=1.2)
    finite = ys[np.isfinite(ys)]
    if finite.size and np.all(finite > 0):
        span = finite.max() / max(finite.min(), 1e-300)
        if span > 1e3:
            ax.set_yscale("log")
    ax.set_xlabel(header[0])
    ax.legend(fontsize=8, frameon=False)
    ax.set_title(csv_path.stem, fontsize=10)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
    return svg_path


def render_run_plots(outdir) -> List[str]:
    """Render every plottable CSV in a run directory; returns new names."""
    outdir = Path(outdir)
    made = []
    for csv_path in sorted(outdir.glob("*.csv")):
        try:
            svg = render_csv_plot(csv_path)
            made.append(svg.name)
        except (ValueError, IndexError):
            continue
    return made
