"""Static figure rendering for scan and evaluation reports.

Figures are written next to the delimited artifacts so a run directory is
self-contained: the scan overview mirrors the curves.csv / cross_vi.csv
content, the evaluation figures mirror coherence.json / sankey.json.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import CoherenceReport, sankey_links
from .scan import ScanResult
from .stability import Partition

__all__ = ["coherence_figure", "sankey_figure", "scan_figure"]


def scan_figure(result: ScanResult, path: str | Path) -> Path:
    """Community count and VI(t) over the grid, plus the cross-time VI map."""
    times = np.array([p.t for p in result.points])
    n_comm = np.array([p.n_communities for p in result.points])
    vi = np.array([p.vi_ensemble for p in result.points])

    fig, (ax_top, ax_bot) = plt.subplots(
        2, 1, figsize=(7.0, 7.5), gridspec_kw={"height_ratios": [2, 3]}
    )
    ax_top.step(times, n_comm, where="mid", color="tab:red", lw=1.5, label="communities")
    ax_top.set_xscale("log")
    ax_top.set_yscale("log")
    ax_top.set_ylabel("number of communities", color="tab:red")
    ax_top.tick_params(axis="y", labelcolor="tab:red")
    ax_vi = ax_top.twinx()
    ax_vi.plot(times, vi, color="tab:blue", lw=1.2, label="ensemble VI")
    ax_vi.set_ylabel("ensemble VI (nats)", color="tab:blue")
    ax_vi.tick_params(axis="y", labelcolor="tab:blue")
    ax_vi.set_ylim(bottom=0.0)
    ax_top.set_xlabel("Markov time")

    log_t = np.log10(times)
    mesh = ax_bot.pcolormesh(log_t, log_t, result.cross_vi, shading="nearest", cmap="viridis")
    ax_bot.set_xlabel("log10 Markov time")
    ax_bot.set_ylabel("log10 Markov time")
    fig.colorbar(mesh, ax=ax_bot, label="cross-time VI (nats)")

    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def coherence_figure(reports: list[tuple[float, CoherenceReport]], path: str | Path) -> Path:
    """Per-cluster median PMI bars, one panel per evaluated scale."""
    n_panels = max(len(reports), 1)
    fig, axes = plt.subplots(
        n_panels, 1, figsize=(7.0, 2.2 * n_panels + 1.0), squeeze=False
    )
    for ax, (t, report) in zip(axes.ravel(), reports):
        scored = [(r.cluster, r.median_pmi) for r in report.per_cluster if r.median_pmi is not None]
        if scored:
            xs = np.arange(len(scored))
            ax.bar(xs, [v for _, v in scored], color="tab:purple", width=0.7)
            ax.set_xticks(xs)
            ax.set_xticklabels([str(c) for c, _ in scored], fontsize=7)
        agg = "n/a" if report.aggregate is None else f"{report.aggregate:.3f}"
        ax.set_title(f"t = {t:.4g}: aggregate coherence {agg}", fontsize=9)
        ax.set_ylabel("median PMI")
        ax.axhline(0.0, color="0.5", lw=0.6)
    axes.ravel()[-1].set_xlabel("cluster")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def sankey_figure(levels: list[tuple[float, Partition]], path: str | Path) -> Path:
    """Flow bands between consecutive partitions (finest scale leftmost).

    Clusters stack vertically in label order, scaled to the document count;
    each band's thickness is the number of shared documents.
    """
    if len(levels) < 2:
        raise ValueError("need at least two partitions for a flow figure")
    n = levels[0][1].n
    gap = 0.01 * n
    fig, ax = plt.subplots(figsize=(2.2 * len(levels), 6.0))
    cmap = plt.get_cmap("tab20")

    def offsets(p: Partition) -> np.ndarray:
        sizes = p.sizes().astype(float)
        tops = np.concatenate([[0.0], np.cumsum(sizes + gap)[:-1]])
        return tops

    for col, (t, p) in enumerate(levels):
        tops = offsets(p)
        sizes = p.sizes()
        for c in range(p.n_communities):
            ax.add_patch(
                plt.Rectangle(
                    (col, tops[c]), 0.12, float(sizes[c]),
                    facecolor=cmap(c % 20), edgecolor="none",
                )
            )
            ax.text(col + 0.06, tops[c] + sizes[c] / 2, str(c), ha="center",
                    va="center", fontsize=7)
        ax.text(col + 0.06, -0.03 * n, f"t={t:.4g}", ha="center", fontsize=8)

    for col in range(len(levels) - 1):
        fine, coarse = levels[col][1], levels[col + 1][1]
        tops_f, tops_c = offsets(fine).copy(), offsets(coarse).copy()
        for src, dst, count in sankey_links(fine, coarse):
            y0, y1 = tops_f[src], tops_c[dst]
            xs = np.linspace(col + 0.12, col + 1.0, 30)
            blend = (1 - np.cos(np.linspace(0, np.pi, 30))) / 2
            lower = y0 + (y1 - y0) * blend
            ax.fill_between(xs, lower, lower + count, color=cmap(src % 20), alpha=0.35, lw=0)
            tops_f[src] += count
            tops_c[dst] += count

    ax.set_xlim(-0.2, len(levels) - 0.6)
    ax.set_ylim(-0.06 * n, offsets(levels[0][1])[-1] + levels[0][1].sizes()[-1] + gap)
    ax.invert_yaxis()
    ax.axis("off")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
