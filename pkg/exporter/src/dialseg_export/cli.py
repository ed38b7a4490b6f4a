"""Command-line entry point for the exporter."""

from __future__ import annotations

import argparse
import sys

from .corpus import CorpusError
from .exporter import (
    DEFAULT_COHERENCE_MODEL,
    DEFAULT_EMBEDDING_MODEL,
    POOLING_CHOICES,
    ExportError,
    ExportJob,
    export_coherence,
    export_embeddings,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialseg-export",
        description=(
            "Run pretrained checkpoints over a dialogue corpus and write "
            "precomputed embedding/coherence files for the segmentation core."
        ),
    )
    parser.add_argument("--corpus", required=True, help="corpus JSONL")
    parser.add_argument(
        "--embedding-model",
        default=DEFAULT_EMBEDDING_MODEL,
        help=f"sentence encoder checkpoint (default: {DEFAULT_EMBEDDING_MODEL})",
    )
    parser.add_argument(
        "--coherence-model",
        default=DEFAULT_COHERENCE_MODEL,
        help=f"next-sentence-prediction checkpoint (default: {DEFAULT_COHERENCE_MODEL})",
    )
    parser.add_argument(
        "--pooling",
        choices=POOLING_CHOICES,
        default="cls",
        help="utterance pooling: the encoder's pooled/CLS output, or masked mean",
    )
    parser.add_argument("--embeddings-out", help="embedding file to write")
    parser.add_argument("--coherence-out", help="coherence score file to write")
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument(
        "--binary", action="store_true", help="write embeddings as UEB1 instead of JSONL"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not args.embeddings_out and not args.coherence_out:
        print("error: nothing to do; pass --embeddings-out and/or --coherence-out", file=sys.stderr)
        return 1
    job = ExportJob(
        corpus_path=args.corpus,
        embedding_model=args.embedding_model,
        coherence_model=args.coherence_model,
        pooling=args.pooling,
        embeddings_out=args.embeddings_out,
        coherence_out=args.coherence_out,
        batch_size=args.batch_size,
        binary=args.binary,
    )
    try:
        if args.embeddings_out:
            path = export_embeddings(job)
            print(f"wrote embeddings to {path}")
        if args.coherence_out:
            path = export_coherence(job)
            print(f"wrote coherence scores to {path}")
    except (ExportError, CorpusError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
