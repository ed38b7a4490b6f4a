"""Batch inference over pretrained checkpoints, written to core file formats.

Embeddings: one vector per utterance, keyed ``"<dialogue_id>:<index>"``
(1-based), as JSONL or the binary UEB1 layout. Coherence: one score per
interval, the next-sentence probability mapped affinely to [-1, 1] via
``2p - 1`` so it can be added to a cosine term without dwarfing it.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Dialogue, load_corpus

DEFAULT_EMBEDDING_MODEL = "princeton-nlp/sup-simcse-bert-base-uncased"
DEFAULT_COHERENCE_MODEL = "bert-base-uncased"

UEB1_MAGIC = b"UEB1"

POOLING_CHOICES = ("cls", "mean")


class ExportError(Exception):
    pass


@dataclass(frozen=True)
class ExportJob:
    corpus_path: str
    embedding_model: str = DEFAULT_EMBEDDING_MODEL
    coherence_model: str = DEFAULT_COHERENCE_MODEL
    pooling: str = "cls"
    embeddings_out: str | None = None
    coherence_out: str | None = None
    batch_size: int = 16
    binary: bool = False

    def __post_init__(self) -> None:
        if self.pooling not in POOLING_CHOICES:
            raise ExportError(f"pooling must be one of {POOLING_CHOICES}, got {self.pooling!r}")
        if self.batch_size < 1:
            raise ExportError("batch_size must be >= 1")


def _load_encoder(model_id: str):
    import torch
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise ExportError(f"cannot load embedding model {model_id!r}: {exc}") from exc
    model.eval()
    torch.set_grad_enabled(False)
    return tokenizer, model


def _pool(outputs, attention_mask, pooling: str) -> np.ndarray:
    import torch

    if pooling == "cls":
        # the encoder's own pooled output when it has one, else the raw
        # first-token state of the last layer
        pooled = getattr(outputs, "pooler_output", None)
        if pooled is None:
            pooled = outputs.last_hidden_state[:, 0]
        return pooled.cpu().numpy()
    hidden = outputs.last_hidden_state
    mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
    summed = (hidden * mask).sum(dim=1)
    counts = torch.clamp(mask.sum(dim=1), min=1.0)
    return (summed / counts).cpu().numpy()


def _batches(items: list, size: int):
    for start in range(0, len(items), size):
        yield items[start : start + size]


def export_embeddings(job: ExportJob) -> Path:
    """Embed every utterance and write the precomputed embedding file."""
    if not job.embeddings_out:
        raise ExportError("no embeddings output path configured")
    corpus = load_corpus(job.corpus_path)
    tokenizer, model = _load_encoder(job.embedding_model)

    keyed: list[tuple[str, str]] = []
    for dialogue in corpus:
        for index, text in enumerate(dialogue.utterances, start=1):
            keyed.append((f"{dialogue.id}:{index}", text))

    entries: list[tuple[str, np.ndarray]] = []
    dim = None
    for batch in _batches(keyed, job.batch_size):
        encoded = tokenizer(
            [text for _, text in batch],
            return_tensors="pt",
            padding=True,
            truncation=True,
        )
        outputs = model(**encoded)
        vectors = _pool(outputs, encoded["attention_mask"], job.pooling)
        for (key, _), vec in zip(batch, vectors):
            vec = np.asarray(vec, dtype=np.float64)
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise ExportError(
                    f"dimension drift at {key}: {vec.shape[0]} != {dim}"
                )
            entries.append((key, vec))

    out = Path(job.embeddings_out)
    if job.binary:
        _write_ueb1(out, entries)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            for key, vec in entries:
                fh.write(json.dumps({"key": key, "vec": [float(x) for x in vec]}) + "\n")
    return out


def _write_ueb1(path: Path, entries: list[tuple[str, np.ndarray]]) -> None:
    dim = entries[0][1].shape[0] if entries else 0
    with open(path, "wb") as fh:
        fh.write(UEB1_MAGIC)
        fh.write(struct.pack("<II", dim, len(entries)))
        for key, vec in entries:
            raw = key.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(np.asarray(vec, dtype="<f4").tobytes())


def _load_nsp(model_id: str):
    import torch
    from transformers import AutoModelForNextSentencePrediction, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModelForNextSentencePrediction.from_pretrained(model_id)
    except Exception as exc:
        raise ExportError(f"cannot load coherence model {model_id!r}: {exc}") from exc
    model.eval()
    torch.set_grad_enabled(False)
    return tokenizer, model


def nsp_context(dialogue: Dialogue, interval: int) -> str:
    """Context text at an interval: the two preceding utterances joined,
    or the first utterance alone at the left edge."""
    if interval == 1:
        return dialogue.utterances[0]
    return f"{dialogue.utterances[interval - 2]} {dialogue.utterances[interval - 1]}"


def export_coherence(job: ExportJob) -> Path:
    """Score every interval with next-sentence prediction, mapped to [-1, 1]."""
    if not job.coherence_out:
        raise ExportError("no coherence output path configured")
    corpus = load_corpus(job.corpus_path)
    tokenizer, model = _load_nsp(job.coherence_model)
    import torch

    pairs: list[tuple[str, int, str, str]] = []
    for dialogue in corpus:
        for interval in range(1, len(dialogue.utterances)):
            pairs.append(
                (
                    dialogue.id,
                    interval,
                    nsp_context(dialogue, interval),
                    dialogue.utterances[interval],
                )
            )

    out = Path(job.coherence_out)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(
            "# coherence = 2 * P(is-next) - 1 from "
            f"{job.coherence_model}; context = two preceding utterances "
            "(first utterance alone at interval 1)\n"
        )
        for batch in _batches(pairs, job.batch_size):
            encoded = tokenizer(
                [ctx for _, _, ctx, _ in batch],
                [resp for _, _, _, resp in batch],
                return_tensors="pt",
                padding=True,
                truncation=True,
            )
            logits = model(**encoded).logits
            # label 0 is "continues the context"
            probs = torch.softmax(logits, dim=-1)[:, 0].cpu().numpy()
            for (did, interval, _, _), p in zip(batch, probs):
                score = float(2.0 * p - 1.0)
                fh.write(
                    json.dumps({"dialogue_id": did, "interval": interval, "score": score})
                    + "\n"
                )
    return out
