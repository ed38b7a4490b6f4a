"""TextTiling-style boundary detection over a relevance series.

Depth scoring measures how far each interval sits below its nearest
enclosing peaks on both sides; intervals whose depth clears a statistical
threshold become boundaries. Used both for inference and for the
pseudo-segmentation that refines training pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dialogue import Segmentation
from .errors import InvalidArgumentError

STATS_OVER_CHOICES = ("positive", "all")


@dataclass(frozen=True)
class TilingConfig:
    """Boundary-detection knobs.

    ``threshold_alpha`` sets tau = mean + alpha * std of the depth scores;
    ``stats_over`` picks whether those statistics cover only strictly
    positive depths (default: short, spiky dialogue series would otherwise
    collapse sigma under a zero-heavy full series) or all of them.
    """

    smoothing_window: int = 1
    threshold_alpha: float = 0.5
    min_segment_utterances: int = 1
    stats_over: str = "positive"

    def __post_init__(self) -> None:
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise InvalidArgumentError(
                f"smoothing_window must be an odd integer >= 1, got {self.smoothing_window}"
            )
        if self.min_segment_utterances < 1:
            raise InvalidArgumentError(
                f"min_segment_utterances must be >= 1, got {self.min_segment_utterances}"
            )
        if self.stats_over not in STATS_OVER_CHOICES:
            raise InvalidArgumentError(
                f"stats_over must be one of {STATS_OVER_CHOICES}, got {self.stats_over!r}"
            )


def smooth_series(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; the window truncates at the edges."""
    values = np.asarray(values, dtype=np.float64)
    if window <= 1:
        return values.copy()
    half = window // 2
    out = np.empty_like(values)
    for i in range(len(values)):
        lo = max(0, i - half)
        hi = min(len(values), i + half + 1)
        out[i] = values[lo:hi].mean()
    return out


def depth_scores(scores: np.ndarray, cfg: TilingConfig = TilingConfig()) -> np.ndarray:
    """Depth of each interval: rise to the left peak plus rise to the right peak.

    Peaks are found by walking outward while values keep (weakly) rising;
    adding a constant to the whole series leaves depths unchanged.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1:
        raise InvalidArgumentError(f"series must be 1-D, got shape {scores.shape}")
    s = smooth_series(scores, cfg.smoothing_window)
    m = len(s)
    depths = np.zeros(m, dtype=np.float64)
    for i in range(m):
        lpeak = s[i]
        for j in range(i - 1, -1, -1):
            if s[j] >= lpeak:
                lpeak = s[j]
            else:
                break
        rpeak = s[i]
        for j in range(i + 1, m):
            if s[j] >= rpeak:
                rpeak = s[j]
            else:
                break
        depths[i] = (lpeak - s[i]) + (rpeak - s[i])
    return depths


def boundary_threshold(depths: np.ndarray, cfg: TilingConfig) -> float | None:
    """tau = mean + alpha * std over the configured depth population.

    Returns None when the positive-depth population is empty (flat series).
    """
    depths = np.asarray(depths, dtype=np.float64)
    pool = depths[depths > 0.0] if cfg.stats_over == "positive" else depths
    if pool.size == 0:
        return None
    return float(pool.mean() + cfg.threshold_alpha * pool.std())


def _enforce_min_segment(
    boundaries: list[int], depths: np.ndarray, n: int, min_utts: int
) -> list[int]:
    # Sentinels at 0 and n count as undroppable boundaries of infinite depth,
    # so a too-small first or last segment sheds its one real boundary.
    bs = list(boundaries)
    while True:
        extended = [0] + bs + [n]
        violation = None
        for a, b in zip(extended, extended[1:]):
            if b - a < min_utts:
                violation = (a, b)
                break
        if violation is None:
            return bs
        a, b = violation
        if a == 0 and b == n:
            return bs  # single segment already; nothing left to drop
        if a == 0:
            drop = b
        elif b == n:
            drop = a
        else:
            # equal depths drop the later boundary
            drop = b if depths[b - 1] <= depths[a - 1] else a
        bs.remove(drop)


def segment_series(
    scores: np.ndarray, cfg: TilingConfig = TilingConfig()
) -> Segmentation:
    """Boundary intervals of a relevance series of length n-1.

    An interval is a boundary when its depth is strictly positive and at
    least tau; if no depth is positive the dialogue stays a single segment.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = len(scores) + 1
    if len(scores) == 0:
        return Segmentation((), n)
    depths = depth_scores(scores, cfg)
    tau = boundary_threshold(depths, cfg)
    if tau is None:
        return Segmentation((), n)
    # depth exactly tau IS a boundary (fixed tie rule for reproducibility)
    candidates = [i + 1 for i, d in enumerate(depths) if d > 0.0 and d >= tau]
    kept = _enforce_min_segment(candidates, depths, n, cfg.min_segment_utterances)
    return Segmentation(tuple(kept), n)
