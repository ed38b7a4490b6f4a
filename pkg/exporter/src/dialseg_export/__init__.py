"""One-shot exporter: run pretrained checkpoints over a dialogue corpus and
write the segmentation core's precomputed embedding and coherence files."""

from .exporter import ExportJob, export_coherence, export_embeddings
from .corpus import load_corpus

__version__ = "0.1.0"

__all__ = ["ExportJob", "export_coherence", "export_embeddings", "load_corpus"]
