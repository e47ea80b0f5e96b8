"""
Plot-ready tables and optional figure rendering.

`write_plot_data` emits smoothed learning curves averaged across seeds
(`curves_<policy>.csv`) and the per-policy bar-chart table (`bars.csv`).
`render_figures` turns those tables into PNGs with matplotlib's Agg backend.
"""

import logging
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
import pandas as pd

from saginmc.harness.metrics import moving_average, records_to_frame

logger = logging.getLogger(__name__)

CURVE_METRICS = ["return", "switch_rate", "latency_s", "power_w", "capacity_bps"]
BAR_METRICS = ["capacity_bps", "latency_s", "power_w"]
CURVE_PREFIX = "curves_"
BARS_FILE = "bars.csv"


def smoothed_curves(runs: Sequence, window: int) -> pd.DataFrame:
    """Per-seed trailing moving averages, then averaged across seeds episode by episode."""
    frames = [records_to_frame(run.records) for run in runs]
    episodes = min(len(frame) for frame in frames)
    curves = {"episode": np.arange(episodes)}
    for metric in CURVE_METRICS:
        per_seed = [moving_average(frame[metric].iloc[:episodes], window) for frame in frames]
        curves[metric] = np.mean(np.asarray(per_seed), axis=0)
    return pd.DataFrame(curves, columns=["episode", *CURVE_METRICS])


def write_plot_data(runs: Sequence, summary: pd.DataFrame, plot_dir: Union[str, Path], window: int) -> List[Path]:
    plot_dir = Path(plot_dir)
    plot_dir.mkdir(parents=True, exist_ok=True)
    written = []
    policies = list(dict.fromkeys(run.policy.value for run in runs))
    for policy in policies:
        cells = [run for run in runs if run.policy.value == policy]
        path = plot_dir / f"{CURVE_PREFIX}{policy}.csv"
        smoothed_curves(cells, window).to_csv(path, index=False)
        written.append(path)
    bars_path = plot_dir / BARS_FILE
    summary.to_csv(bars_path, index=False)
    written.append(bars_path)
    logger.info(f"Wrote plot data for {len(policies)} policies to {plot_dir}")
    return written


def render_figures(plot_dir: Union[str, Path], figure_dir: Union[str, Path]) -> List[Path]:
    """Learning-curve and bar-chart PNGs from the tables in `plot_dir`."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plot_dir, figure_dir = Path(plot_dir), Path(figure_dir)
    curve_files = sorted(plot_dir.glob(f"{CURVE_PREFIX}*.csv"))
    if not curve_files:
        raise ValueError(f"No plot data found in {plot_dir}")
    figure_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, axes = plt.subplots(2, 2, figsize=(11, 8))
    titles = {"return": "Episode reward", "switch_rate": "Switching rate",
              "latency_s": "Average latency (s)", "power_w": "Power consumption (W)"}
    for path in curve_files:
        curves = pd.read_csv(path)
        label = path.stem[len(CURVE_PREFIX):]
        for ax, metric in zip(axes.flat, titles):
            ax.plot(curves["episode"], curves[metric], label=label)
    for ax, (metric, title) in zip(axes.flat, titles.items()):
        ax.set_title(title)
        ax.set_xlabel("Episode")
    axes.flat[0].legend(fontsize="small")
    fig.tight_layout()
    curves_png = figure_dir / "learning_curves.png"
    fig.savefig(curves_png, dpi=160)
    plt.close(fig)
    written.append(curves_png)

    bars_path = plot_dir / BARS_FILE
    if bars_path.exists():
        bars = pd.read_csv(bars_path)
        fig, axes = plt.subplots(1, len(BAR_METRICS), figsize=(14, 4))
        for ax, metric in zip(axes, BAR_METRICS):
            ax.bar(bars["policy"], bars[f"{metric}_mean"], yerr=bars[f"{metric}_std"], capsize=3)
            ax.set_title(metric)
            ax.tick_params(axis="x", rotation=45)
        fig.tight_layout()
        bars_png = figure_dir / "comparison.png"
        fig.savefig(bars_png, dpi=160)
        plt.close(fig)
        written.append(bars_png)

    logger.info(f"Rendered {len(written)} figures to {figure_dir}")
    return written
