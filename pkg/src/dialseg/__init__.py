"""Unsupervised dialogue topic segmentation.

Scores every utterance interval by topic similarity plus coherence, finds
boundaries with TextTiling-style depth thresholds, evaluates with Pk and
WindowDiff, and trains lightweight projection/coherence heads on unlabeled
dialogues via neighbor matching with pseudo-segmentation refinement and
relevance modeling.
"""

from .coherence import (
    CoherenceHead,
    CoherenceScorer,
    FileCoherence,
    HeadCoherence,
    ZeroCoherence,
    coherence_score,
    coherence_series,
)
from .corpus import (
    SyntheticSpec,
    default_spec,
    generate_synthetic,
    harder_spec,
    load_corpus,
    load_predictions,
    save_corpus,
    save_predictions,
)
from .dialogue import Dialogue, Segmentation
from .embeddings import (
    BaseEmbedding,
    DegenerateSimilarityWarning,
    EmbeddingProvider,
    HttpServiceProvider,
    LexicalHashProvider,
    PrecomputedFileProvider,
    ProjectionHead,
    cosine,
    read_embedding_file,
    write_embedding_jsonl,
    write_embedding_ueb1,
)
from .metrics import (
    CorpusMetrics,
    MetricResult,
    evaluate_corpus,
    evaluate_dialogue,
    pk,
    window_diff,
    window_size,
)
from .pipeline import Segmenter
from .relevance import RelevanceSeries, coherence_only_series, relevance_series
from .selfsup import (
    AnchorPairs,
    RmFragmentPair,
    neighbor_only_pairs,
    neighbor_sets,
    pseudo_segment_sets,
    refined_pairs,
    rm_fragments,
)
from .tiling import TilingConfig, depth_scores, segment_series, smooth_series
from .trainer import (
    TrainConfig,
    TrainReport,
    initial_heads,
    load_heads,
    num_loss,
    rm_loss,
    save_heads,
    total_loss,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorPairs",
    "BaseEmbedding",
    "CoherenceHead",
    "CoherenceScorer",
    "CorpusMetrics",
    "DegenerateSimilarityWarning",
    "Dialogue",
    "EmbeddingProvider",
    "FileCoherence",
    "HeadCoherence",
    "HttpServiceProvider",
    "LexicalHashProvider",
    "MetricResult",
    "PrecomputedFileProvider",
    "ProjectionHead",
    "RelevanceSeries",
    "RmFragmentPair",
    "Segmentation",
    "Segmenter",
    "SyntheticSpec",
    "TilingConfig",
    "TrainConfig",
    "TrainReport",
    "ZeroCoherence",
    "coherence_only_series",
    "coherence_score",
    "coherence_series",
    "cosine",
    "default_spec",
    "depth_scores",
    "evaluate_corpus",
    "evaluate_dialogue",
    "generate_synthetic",
    "harder_spec",
    "initial_heads",
    "load_corpus",
    "load_heads",
    "load_predictions",
    "neighbor_only_pairs",
    "neighbor_sets",
    "num_loss",
    "pk",
    "pseudo_segment_sets",
    "read_embedding_file",
    "refined_pairs",
    "relevance_series",
    "rm_fragments",
    "rm_loss",
    "save_corpus",
    "save_heads",
    "save_predictions",
    "segment_series",
    "smooth_series",
    "total_loss",
    "train",
    "window_diff",
    "window_size",
    "write_embedding_jsonl",
    "write_embedding_ueb1",
]
