"""SVG line plots of regret traces, one figure per metric, one series per policy."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import ExportError  # noqa: E402

METRICS = {
    "regret_over_ln_n": "Regret / ln n",
    "regret": "Regret",
    "reward_variance": "Reward variance",
}


def plot_metric(traces: Sequence, metric: str, path) -> Path:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    path = Path(path)
    plt.rcParams["svg.hashsalt"] = "cee-rmab"
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for trace in traces:
        y = np.asarray(getattr(trace, metric), dtype=float)
        ax.plot(trace.n, y, marker="o", markersize=3, label=trace.label)
    ax.set_xscale("log")
    ax.set_xlabel("Time slot n")
    ax.set_ylabel(METRICS[metric])
    ax.grid(True, which="both", alpha=0.3)
    if traces:
        ax.legend()
    fig.tight_layout()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path


def plot_metrics(traces: Sequence, out_dir) -> list:
    out_dir = Path(out_dir)
    return [plot_metric(traces, m, out_dir / f"{m}.svg") for m in METRICS]
