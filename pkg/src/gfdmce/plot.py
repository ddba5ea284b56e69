"""Log-scale SVG line charts of sweep CSVs."""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .montecarlo import read_csv  # noqa: E402

METRICS = {"mse": "Channel MSE", "ser": "SER"}


def plot_curves(csv_path, svg_path, metric: str = "mse") -> int:
    """Draw one line per (scheme, filter, K, M); returns the number of lines drawn.

    Non-positive values (e.g. zero SER at high SNR) have no place on a log
    axis and are dropped.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {sorted(METRICS)}")
    curves = defaultdict(list)
    for row in read_csv(csv_path):
        label = row["scheme"] if row["filter"] == "none" else f"{row['scheme']} ({row['filter']})"
        label += f" K={row['K']} M={row['M']}"
        curves[label].append((float(row["snr_db"]), float(row[metric])))

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    drawn = 0
    for label, points in curves.items():
        points = sorted(p for p in points if p[1] > 0)
        if not points:
            continue
        snr, values = zip(*points)
        ax.semilogy(snr, values, marker="o", markersize=3, label=label)
        drawn += 1
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel(METRICS[metric])
    ax.grid(True, which="both", alpha=0.3)
    if drawn:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
    return drawn
