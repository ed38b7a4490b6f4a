"""Render per-dialogue relevance and depth curves to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .relevance import RelevanceSeries


def render_dialogue_scores(
    path: str | Path,
    dialogue_id: str,
    series: RelevanceSeries,
    depths: np.ndarray,
    boundaries: tuple[int, ...] = (),
    gold: tuple[int, ...] | None = None,
    threshold: float | None = None,
) -> None:
    """Write a two-panel figure: relevance components above, depths below.

    Predicted boundaries show as solid vertical lines in both panels; gold
    boundaries, when known, as dotted lines in the top panel.
    """
    intervals = np.arange(1, len(series) + 1)
    fig, (ax_rel, ax_depth) = plt.subplots(
        2, 1, sharex=True, figsize=(max(6.0, 0.45 * len(series) + 2.0), 5.0)
    )
    ax_rel.plot(intervals, series.scores, marker="o", lw=1.5, label="relevance")
    ax_rel.plot(intervals, series.topic_sim, ls="--", lw=1.0, label="topic sim")
    ax_rel.plot(intervals, series.coherence, ls=":", lw=1.0, label="coherence")
    for b in boundaries:
        ax_rel.axvline(b, color="crimson", lw=1.2, alpha=0.8)
        ax_depth.axvline(b, color="crimson", lw=1.2, alpha=0.8)
    if gold:
        for b in gold:
            ax_rel.axvline(b, color="seagreen", ls=":", lw=1.6, alpha=0.9)
    ax_rel.set_ylabel("relevance")
    ax_rel.legend(loc="best", fontsize=8)
    ax_rel.set_title(dialogue_id)

    ax_depth.bar(intervals, depths, width=0.6, color="steelblue", alpha=0.8)
    if threshold is not None:
        ax_depth.axhline(threshold, color="gray", ls="--", lw=1.0, label="threshold")
        ax_depth.legend(loc="best", fontsize=8)
    ax_depth.set_ylabel("depth")
    ax_depth.set_xlabel("interval")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
