"""Learning-curve emission: smoothed CSVs and SVG plots from run logs."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SMOOTHING_WINDOW = 50


def read_log_rewards(log_path) -> np.ndarray:
    rewards = []
    with open(log_path, encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rewards.append(float(row["reward"]))
    return np.array(rewards)


def smooth(rewards: np.ndarray, window: int = SMOOTHING_WINDOW) -> np.ndarray:
    """Trailing-window means; shorter runs collapse to one averaged point."""
    n = len(rewards)
    if n == 0:
        return np.array([])
    if n < window:
        return np.array([rewards.mean()])
    kernel = np.ones(window) / window
    return np.convolve(rewards, kernel, mode="valid")


def emit_curves(run_dir, window: int = SMOOTHING_WINDOW) -> list:
    """One CSV + one SVG per seed log found in the run directory."""
    run_dir = Path(run_dir)
    outputs = []
    logs = sorted(run_dir.glob("seed*.log.csv"))
    if not logs:
        raise IOError(f"no seed logs found in {run_dir}")
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for log_path in logs:
        label = log_path.name.replace(".log.csv", "")
        rewards = read_log_rewards(log_path)
        smoothed = smooth(rewards, window)
        csv_path = run_dir / f"{label}.curve.csv"
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["episode", "smoothed_reward"])
            for i, value in enumerate(smoothed):
                writer.writerow([i, f"{value:.8g}"])
        outputs.append(csv_path)
        if len(smoothed):
            ax.plot(np.arange(len(smoothed)), smoothed, label=label)
    ax.set_xlabel("episode")
    ax.set_ylabel(f"reward (window {window})")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    svg_path = run_dir / "curves.svg"
    fig.savefig(svg_path)
    plt.close(fig)
    outputs.append(svg_path)
    return outputs
