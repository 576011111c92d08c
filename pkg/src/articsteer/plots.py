"""SVG figures for lane-change runs.

Figures are written with a fixed hash salt and no creation date so that
repeated runs of the same configuration produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .simulate import SimResult

_STATE_LABELS = (
    "lateral velocity (m/s)",
    "yaw rate (rad/s)",
    "articulation rate (rad/s)",
    "articulation angle (rad)",
    "lateral offset (m)",
    "heading (rad)",
)

_SAVE_OPTS = {"format": "svg", "metadata": {"Date": None}}


def _new_figure(nrows: int, ncols: int, height: float):
    plt.rcParams["svg.hashsalt"] = "articsteer"
    return plt.subplots(nrows, ncols, figsize=(11.0, height), squeeze=False)


def save_state_plot(result: SimResult, path: str, title: str = ""):
    """State trajectories against the reference, one panel per state."""
    fig, axes = _new_figure(3, 2, 8.0)
    for idx in range(6):
        ax = axes[idx // 2][idx % 2]
        ax.plot(result.time, result.x_ref[:, idx], "k--", linewidth=0.9, label="reference")
        ax.plot(result.time, result.states[:, idx], "b-", linewidth=1.0, label="vehicle")
        ax.set_ylabel(_STATE_LABELS[idx], fontsize=8)
        ax.grid(True, alpha=0.3)
        ax.tick_params(labelsize=8)
        if idx == 0:
            ax.legend(fontsize=8, loc="best")
        if idx >= 4:
            ax.set_xlabel("time (s)", fontsize=8)
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def save_path_plot(result: SimResult, path: str, v: float, corridor_width: float, title: str = ""):
    """Global tractor trace with the lane-change corridor, plus steering."""
    fig, axes = _new_figure(2, 1, 7.0)
    ax = axes[0][0]
    ref_s = v * result.time
    ax.plot(ref_s, result.x_ref[:, 4], "k--", linewidth=0.9, label="lane centreline")
    half = 0.5 * corridor_width
    ax.plot(ref_s, result.x_ref[:, 4] + half, color="0.6", linewidth=0.7)
    ax.plot(ref_s, result.x_ref[:, 4] - half, color="0.6", linewidth=0.7)
    ax.plot(result.pos_x, result.pos_y, "b-", linewidth=1.1, label="tractor")
    ax.set_xlabel("longitudinal position (m)", fontsize=8)
    ax.set_ylabel("lateral position (m)", fontsize=8)
    ax.grid(True, alpha=0.3)
    ax.tick_params(labelsize=8)
    ax.legend(fontsize=8, loc="best")
    ax2 = axes[1][0]
    ax2.plot(result.time, result.u_ref, "k--", linewidth=0.9, label="feedforward")
    ax2.plot(result.time, result.alpha, "b-", linewidth=0.8, label="applied")
    ax2.set_xlabel("time (s)", fontsize=8)
    ax2.set_ylabel("steering angle (rad)", fontsize=8)
    ax2.grid(True, alpha=0.3)
    ax2.tick_params(labelsize=8)
    ax2.legend(fontsize=8, loc="best")
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
