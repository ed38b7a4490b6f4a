"""Per-interval relevance: topic-window cosine plus coherence.

The topic term at interval i compares the mean of the two topic vectors on
each side: cos((h_{i-1}+h_i)/2, (h_{i+1}+h_{i+2})/2). At the dialogue edges
the windows are clamped to existing utterances and average what exists, so
every interval gets a score (boundaries next to the edges are common in
short dialogues).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import cosine
from .errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class RelevanceSeries:
    """Scores r_1..r_{n-1} with their per-interval decomposition.

    Invariant: scores == topic_sim + coherence, elementwise and exactly.
    """

    scores: np.ndarray
    topic_sim: np.ndarray
    coherence: np.ndarray

    def __post_init__(self) -> None:
        if not (len(self.scores) == len(self.topic_sim) == len(self.coherence)):
            raise InvalidArgumentError("relevance component lengths differ")

    def __len__(self) -> int:
        return len(self.scores)


def topic_window_rows(n: int, i: int) -> tuple[slice, slice]:
    """0-based row slices of the left/right topic windows at interval i."""
    left = slice(max(1, i - 1) - 1, i)
    right = slice(i, min(n, i + 2))
    return left, right


def relevance_series(topic: np.ndarray, coherence: np.ndarray) -> RelevanceSeries:
    """Combine topic representations and a coherence series into r_1..r_{n-1}."""
    topic = np.asarray(topic, dtype=np.float64)
    coherence = np.asarray(coherence, dtype=np.float64)
    if topic.ndim != 2:
        raise InvalidArgumentError(f"topic matrix must be 2-D, got {topic.shape}")
    n = topic.shape[0]
    if coherence.shape != (max(n - 1, 0),):
        raise InvalidArgumentError(
            f"coherence length {coherence.shape} does not match n={n}"
        )
    topic_sim = np.zeros(max(n - 1, 0), dtype=np.float64)
    for i in range(1, n):
        left, right = topic_window_rows(n, i)
        topic_sim[i - 1] = cosine(topic[left].mean(axis=0), topic[right].mean(axis=0))
    scores = topic_sim + coherence
    return RelevanceSeries(scores=scores, topic_sim=topic_sim, coherence=coherence.copy())


def coherence_only_series(coherence: np.ndarray) -> RelevanceSeries:
    """Relevance with the topic term dropped (coherence-only ablation)."""
    coherence = np.asarray(coherence, dtype=np.float64)
    return RelevanceSeries(
        scores=coherence.copy(),
        topic_sim=np.zeros_like(coherence),
        coherence=coherence.copy(),
    )
