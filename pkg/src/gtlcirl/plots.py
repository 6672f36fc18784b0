"""Report figures rendered next to the delimited output files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_COLORS = {
    "gtl_cirl": "#1f77b4",
    "standard_rl": "#d62728",
    "counterfactual_rl": "#2ca02c",
}

_LABELS = {
    "gtl_cirl": "GTL-CIRL",
    "standard_rl": "Standard RL",
    "counterfactual_rl": "Counterfactual RL",
}


def _rolling_mean(values: np.ndarray, window: int) -> np.ndarray:
    if len(values) == 0:
        return values
    window = min(window, len(values))
    kernel = np.ones(window) / window
    return np.convolve(values, kernel, mode="valid")


def save_learning_curve(record, path: str | Path, window: int = 25) -> None:
    """Per-episode reward plus rolling success rate for a single run."""
    rewards = np.array([row.cumulative_reward for row in record.rows])
    success = np.array([1.0 if row.success else 0.0 for row in record.rows])
    fig, (ax_reward, ax_success) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax_reward.plot(rewards, color="#444444", linewidth=0.8, alpha=0.6)
    if len(rewards) >= 2:
        smoothed = _rolling_mean(rewards, window)
        ax_reward.plot(
            np.arange(len(rewards) - len(smoothed), len(rewards)),
            smoothed,
            color="#1f77b4",
            linewidth=1.6,
        )
    ax_reward.set_ylabel("episode reward")
    ax_reward.set_title(f"{record.config.method} on {record.config.environment}")
    rolled = _rolling_mean(success, window)
    ax_success.plot(
        np.arange(len(success) - len(rolled), len(success)),
        rolled,
        color="#2ca02c",
        linewidth=1.6,
    )
    ax_success.set_ylim(-0.05, 1.05)
    ax_success.set_ylabel(f"success rate (window {min(window, len(success))})")
    ax_success.set_xlabel("episode")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_success_comparison(records_by_method, path: str | Path, window: int = 25) -> None:
    """Mean rolling success rate per method across seeds, with a band of
    one standard deviation."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    environment = None
    for method in sorted(records_by_method):
        records = records_by_method[method]
        if not records:
            continue
        environment = records[0].config.environment
        matrix = np.array(
            [[1.0 if row.success else 0.0 for row in record.rows] for record in records]
        )
        rolled = np.array([_rolling_mean(run, window) for run in matrix])
        xs = np.arange(matrix.shape[1] - rolled.shape[1], matrix.shape[1])
        mean = rolled.mean(axis=0)
        std = rolled.std(axis=0)
        color = _COLORS.get(method, "#777777")
        ax.plot(xs, mean, color=color, linewidth=1.8, label=_LABELS.get(method, method))
        ax.fill_between(xs, mean - std, mean + std, color=color, alpha=0.15)
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("episode")
    ax.set_ylabel(f"success rate (window {window})")
    if environment:
        ax.set_title(f"Success rates on the {environment} environment")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
