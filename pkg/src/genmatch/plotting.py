"""Matplotlib figure export for the CLI report paths."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_convergence_plot(path, log):
    """Best and mean fitness per generation."""
    gens = [entry["generation"] for entry in log]
    best = [entry["best_e_fit"] for entry in log]
    mean = [entry["mean_e_fit"] for entry in log]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(gens, mean, label="population mean", color="tab:orange")
    ax.plot(gens, best, label="fittest chromosome", color="tab:blue")
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness energy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_curve_plot(path, curve):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(curve.thresholds, curve.fractions)
    ax.set_xlabel("geodesic error")
    ax.set_ylabel("fraction of correspondences")
    ax.set_ylim(0.0, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_distance_heatmap(path, matrix, title=""):
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(np.asarray(matrix), cmap="viridis")
    fig.colorbar(im, ax=ax, label="chromosome distance")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def scalar_to_rgb(values, cmap="viridis"):
    """Map a per-vertex scalar to uint8 RGB colors."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    unit = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
    rgba = plt.get_cmap(cmap)(unit)
    return (rgba[:, :3] * 255).astype(np.uint8)
