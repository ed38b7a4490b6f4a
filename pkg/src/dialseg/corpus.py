"""Corpus loading, saving, predictions I/O, and synthetic benchmarks.

The canonical corpus format is JSON Lines, one dialogue per line:

    {"id": "...", "utterances": ["...", ...], "boundaries": [int, ...]}

``boundaries`` is optional (gold annotation, 1-based interval indices).
Predictions use the same shape without ``utterances``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .dialogue import Dialogue, Segmentation
from .errors import (
    CorpusParseError,
    DuplicateDialogueIdError,
    GenerationError,
    InvalidArgumentError,
    InvalidBoundaryError,
)


def load_corpus(path: str | Path) -> list[Dialogue]:
    """Load and validate a dialogue corpus; ids must be unique in the file."""
    path = Path(path)
    dialogues: list[Dialogue] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(str(path), lineno, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise CorpusParseError(str(path), lineno, "line is not a JSON object")
            try:
                did = str(obj["id"])
                utterances = obj["utterances"]
            except KeyError as exc:
                raise CorpusParseError(str(path), lineno, f"missing field {exc}") from exc
            if not isinstance(utterances, list):
                raise CorpusParseError(str(path), lineno, "utterances must be a list")
            if did in seen:
                raise DuplicateDialogueIdError(
                    f"{path}:{lineno}: duplicate dialogue id {did!r}"
                )
            seen.add(did)
            boundaries = obj.get("boundaries")
            gold = None
            if boundaries is not None:
                try:
                    gold = Segmentation(tuple(boundaries), n=len(utterances))
                except InvalidArgumentError as exc:
                    raise InvalidBoundaryError(
                        f"{path}:{lineno}: dialogue {did!r}: {exc}"
                    ) from exc
            try:
                dialogues.append(Dialogue(id=did, utterances=tuple(utterances), gold_boundaries=gold))
            except InvalidArgumentError as exc:
                raise CorpusParseError(str(path), lineno, str(exc)) from exc
    return dialogues


def save_corpus(path: str | Path, dialogues: Iterable[Dialogue]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in dialogues:
            obj: dict = {"id": d.id, "utterances": list(d.utterances)}
            if d.gold_boundaries is not None:
                obj["boundaries"] = list(d.gold_boundaries.boundaries)
            fh.write(json.dumps(obj) + "\n")


def load_predictions(path: str | Path) -> dict[str, list[int]]:
    """Load ``{"id", "boundaries"}`` lines; range checks happen at evaluation."""
    path = Path(path)
    out: dict[str, list[int]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                did = str(obj["id"])
                boundaries = [int(b) for b in obj["boundaries"]]
            except (ValueError, KeyError, TypeError) as exc:
                raise CorpusParseError(str(path), lineno, str(exc)) from exc
            if did in out:
                raise DuplicateDialogueIdError(
                    f"{path}:{lineno}: duplicate dialogue id {did!r}"
                )
            out[did] = boundaries
    return out


def save_predictions(path: str | Path, predictions: Mapping[str, Segmentation]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for did in predictions:
            fh.write(
                json.dumps({"id": did, "boundaries": list(predictions[did].boundaries)})
                + "\n"
            )


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic topic-segmented corpus.

    Each dialogue concatenates a few segments; each segment's utterances
    sample tokens from that segment's topic pool. Pools are pairwise
    disjoint; ``adjacent_overlap`` instead injects noise at generation time
    by drawing the occasional token from a neighboring segment's pool, which
    blurs boundaries without entangling the vocabularies themselves.
    """

    dialogues: int = 50
    segments_range: tuple[int, int] = (3, 6)
    utterances_range: tuple[int, int] = (3, 8)
    tokens_per_utterance: tuple[int, int] = (5, 10)
    topics: int = 6
    tokens_per_topic: int = 10
    adjacent_overlap: float = 0.0
    seed: int = 0
    vocabulary: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self) -> None:
        for name in ("dialogues", "topics", "tokens_per_topic"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        for name in ("segments_range", "utterances_range", "tokens_per_utterance"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise InvalidArgumentError(f"{name} must satisfy 1 <= lo <= hi")
        if not 0.0 <= self.adjacent_overlap < 1.0:
            raise InvalidArgumentError("adjacent_overlap must be in [0, 1)")

    def pools(self) -> tuple[tuple[str, ...], ...]:
        if self.vocabulary is not None:
            return self.vocabulary
        return tuple(
            tuple(f"t{t:02d}w{j:03d}" for j in range(self.tokens_per_topic))
            for t in range(self.topics)
        )


def default_spec() -> SyntheticSpec:
    """Disjoint-vocabulary benchmark: recoverable by the untrained pipeline."""
    return SyntheticSpec()


def harder_spec(dialogues: int = 40, seed: int = 0) -> SyntheticSpec:
    """Benchmark with 30% lexical bleed between adjacent topics."""
    return SyntheticSpec(dialogues=dialogues, adjacent_overlap=0.3, seed=seed)


def generate_synthetic(spec: SyntheticSpec) -> list[Dialogue]:
    """Deterministically generate a gold-annotated corpus from a spec."""
    pools = spec.pools()
    flat: set[str] = set()
    for pool in pools:
        if not pool:
            raise GenerationError("empty topic pool")
        overlap = flat & set(pool)
        if overlap:
            raise GenerationError(f"topic pools share tokens: {sorted(overlap)[:5]}")
        flat |= set(pool)
    if len(pools) < spec.segments_range[1]:
        raise GenerationError(
            f"{len(pools)} topic pools cannot cover up to {spec.segments_range[1]} "
            "segments per dialogue"
        )
    rng = np.random.default_rng(spec.seed)
    dialogues: list[Dialogue] = []
    for d_idx in range(spec.dialogues):
        n_segments = int(rng.integers(spec.segments_range[0], spec.segments_range[1] + 1))
        topic_ids = rng.choice(len(pools), size=n_segments, replace=False)
        utterances: list[str] = []
        boundaries: list[int] = []
        for s in range(n_segments):
            n_utts = int(rng.integers(spec.utterances_range[0], spec.utterances_range[1] + 1))
            for _ in range(n_utts):
                n_tokens = int(
                    rng.integers(spec.tokens_per_utterance[0], spec.tokens_per_utterance[1] + 1)
                )
                tokens = []
                for _ in range(n_tokens):
                    t = int(topic_ids[s])
                    if spec.adjacent_overlap > 0.0 and rng.random() < spec.adjacent_overlap:
                        neighbors = []
                        if s > 0:
                            neighbors.append(int(topic_ids[s - 1]))
                        if s + 1 < n_segments:
                            neighbors.append(int(topic_ids[s + 1]))
                        if neighbors:
                            t = neighbors[int(rng.integers(len(neighbors)))]
                    pool = pools[t]
                    tokens.append(pool[int(rng.integers(len(pool)))])
                utterances.append(" ".join(tokens))
            if s < n_segments - 1:
                boundaries.append(len(utterances))
        dialogues.append(
            Dialogue(
                id=f"synth-{d_idx:04d}",
                utterances=tuple(utterances),
                gold_boundaries=Segmentation(tuple(boundaries), n=len(utterances)),
            )
        )
    return dialogues
