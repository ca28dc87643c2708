"""Matplotlib renderings of the report artifacts.

Each function writes one figure file next to the delimited output it
mirrors. Rendering is deterministic: identical inputs produce
byte-identical image files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap

_DPI = 150


def plot_mi_curve(mi_curve, path, threshold=None) -> None:
    """Per-band MI as a stem-style profile, with the relevance cut if given."""
    mi_curve = np.asarray(mi_curve, dtype=float)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    bands = np.arange(mi_curve.size)
    ax.vlines(bands, 0, mi_curve, color="tab:blue", lw=1.5)
    ax.plot(bands, mi_curve, "o", color="tab:blue", ms=3)
    if threshold is not None:
        ax.axhline(threshold, color="tab:red", ls="--", lw=1, label=f"threshold {threshold:g}")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("band")
    ax.set_ylabel("MI with ground truth (bits)")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_fano_bounds(mi_curve, lowers, uppers, path) -> None:
    """Per-band error-probability envelope alongside the MI profile."""
    bands = np.arange(len(mi_curve))
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.fill_between(bands, lowers, uppers, color="tab:orange", alpha=0.35,
                    label="error bounds")
    ax.plot(bands, uppers, color="tab:orange", lw=1)
    ax.plot(bands, lowers, color="tab:orange", lw=1)
    ax2 = ax.twinx()
    ax2.plot(bands, mi_curve, color="tab:blue", lw=1.2, label="MI (bits)")
    ax.set_xlabel("band")
    ax.set_ylabel("error probability")
    ax2.set_ylabel("MI (bits)", color="tab:blue")
    ax.set_ylim(0, 1)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_redundancy_matrix(matrix, path) -> None:
    """Heatmap of the pairwise normalized-MI table, labeled by band index."""
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(matrix.cells, cmap="viridis", vmin=0.0, vmax=1.0)
    ticks = np.arange(matrix.size)
    ax.set_xticks(ticks, [str(b) for b in matrix.band_order], fontsize=7, rotation=90)
    ax.set_yticks(ticks, [str(b) for b in matrix.band_order], fontsize=7)
    ax.set_xlabel("band (ascending MI)")
    ax.set_ylabel("band (ascending MI)")
    fig.colorbar(im, ax=ax, label=matrix.measure_kind)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _grid_pivot(cells, attr):
    rel = sorted({c.th_relevance for c in cells})
    red = sorted({c.th_redundancy for c in cells})
    grid = np.full((len(rel), len(red)), np.nan)
    for c in cells:
        grid[rel.index(c.th_relevance), red.index(c.th_redundancy)] = getattr(c, attr)
    return rel, red, grid


def plot_sweep_grid(cells, attr, label, path) -> None:
    """Heatmap of one sweep quantity over the threshold grid."""
    rel, red, grid = _grid_pivot(cells, attr)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.imshow(grid, cmap="viridis", aspect="auto", origin="lower")
    ax.set_xticks(range(len(red)), [f"{v:g}" for v in red], fontsize=8)
    ax.set_yticks(range(len(rel)), [f"{v:g}" for v in rel], fontsize=8)
    ax.set_xlabel("redundancy threshold")
    ax.set_ylabel("relevance threshold (bits)")
    for i in range(len(rel)):
        for j in range(len(red)):
            v = grid[i, j]
            if v == v:
                ax.text(j, i, f"{v:.3g}", ha="center", va="center", fontsize=7,
                        color="white")
    fig.colorbar(im, ax=ax, label=label)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _label_cmap(num_classes: int):
    base = plt.get_cmap("tab20", 20)
    colors = [(0, 0, 0, 1)] + [base(i % 20) for i in range(num_classes)]
    cmap = ListedColormap(colors)
    norm = BoundaryNorm(np.arange(-0.5, num_classes + 1.5), cmap.N)
    return cmap, norm


def plot_label_map(labels, num_classes, path, title=None) -> None:
    """Colorized class-label map; label 0 (unlabeled) renders black."""
    cmap, norm = _label_cmap(num_classes)
    fig, ax = plt.subplots(figsize=(5.5, 5))
    im = ax.imshow(labels, cmap=cmap, norm=norm, interpolation="nearest")
    ax.set_xticks([])
    ax.set_yticks([])
    if title:
        ax.set_title(title, fontsize=10)
    cbar = fig.colorbar(im, ax=ax, ticks=np.arange(0, num_classes + 1))
    cbar.ax.tick_params(labelsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_band_gallery(cube, path, max_bands=25) -> None:
    """Contact sheet of band images, one tile per band."""
    n = min(cube.bands, max_bands)
    ncols = int(np.ceil(np.sqrt(n)))
    nrows = int(np.ceil(n / ncols))
    fig, axes = plt.subplots(nrows, ncols, figsize=(2.2 * ncols, 2.2 * nrows))
    axes = np.atleast_1d(axes).ravel()
    for b in range(n):
        ax = axes[b]
        ax.imshow(cube.band(b), cmap="gray", interpolation="nearest")
        ax.set_title(f"band {b}", fontsize=8)
        ax.set_xticks([])
        ax.set_yticks([])
    for ax in axes[n:]:
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
