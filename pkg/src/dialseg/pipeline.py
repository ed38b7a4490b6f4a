"""End-to-end segmentation: embeddings -> relevance -> boundary detection."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coherence import CoherenceScorer, ZeroCoherence
from .dialogue import Dialogue, Segmentation
from .embeddings import EmbeddingProvider, ProjectionHead
from .relevance import RelevanceSeries, coherence_only_series, relevance_series
from .tiling import TilingConfig, depth_scores, segment_series


@dataclass
class Segmenter:
    """A configured segmentation pipeline.

    ``topic_head=None`` uses base vectors directly as topic representations
    (the untrained default); ``use_topic=False`` drops the topic term
    entirely, scoring by coherence alone.
    """

    provider: EmbeddingProvider
    topic_head: ProjectionHead | None = None
    coherence: CoherenceScorer = field(default_factory=ZeroCoherence)
    tiling: TilingConfig = field(default_factory=TilingConfig)
    use_topic: bool = True

    def relevance_for(self, dialogue: Dialogue) -> RelevanceSeries:
        base = self.provider.embed_matrix(dialogue)
        coherence = self.coherence.series(dialogue, base)
        if not self.use_topic:
            return coherence_only_series(coherence)
        topic = self.topic_head.project_all(base) if self.topic_head else base
        return relevance_series(topic, coherence)

    def segment_dialogue(self, dialogue: Dialogue) -> Segmentation:
        if len(dialogue) == 1:
            return Segmentation((), 1)
        series = self.relevance_for(dialogue)
        return segment_series(series.scores, self.tiling)

    def scores_for(self, dialogue: Dialogue) -> tuple[RelevanceSeries, np.ndarray]:
        """Relevance series and its depth scores (for dumps and plots)."""
        series = self.relevance_for(dialogue)
        return series, depth_scores(series.scores, self.tiling)

    def segment_corpus(
        self, dialogues: list[Dialogue], jobs: int = 1
    ) -> dict[str, Segmentation]:
        """Segment many dialogues; results are keyed by id in input order."""
        if jobs <= 1 or len(dialogues) <= 1:
            return {d.id: self.segment_dialogue(d) for d in dialogues}
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(self.segment_dialogue, dialogues))
        return {d.id: seg for d, seg in zip(dialogues, results)}
