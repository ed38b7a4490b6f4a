"""Interval coherence scoring.

The coherence score c_i at interval i measures how well u_{i+1} responds to
its immediate context (u_{i-1}, u_i). The trainable scorer is a bilinear
form over base embeddings squashed by tanh, which keeps c_i on the same
scale as the cosine topic term it is added to. Scores can also come from a
precomputed file.
"""

from __future__ import annotations

import abc
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dialogue import Dialogue
from .errors import InvalidArgumentError, MissingScoreError, ScoreFileError


@dataclass(eq=False)
class CoherenceHead:
    """Trainable bilinear form: c_i = tanh(ctx^T M resp).

    Same mutation contract as ProjectionHead: only the trainer writes it.
    """

    matrix: np.ndarray  # (d_base, d_base)

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise InvalidArgumentError(
                f"coherence matrix must be square, got shape {self.matrix.shape}"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise InvalidArgumentError("coherence matrix must be finite")

    @property
    def d_base(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def initialize(cls, d_base: int, seed: int = 0) -> "CoherenceHead":
        """Near-identity start (0.1 I plus uniform +-0.01 noise).

        Small but nonzero so early relevance is dominated by the topic term
        while the coherence path still has gradient signal.
        """
        rng = np.random.default_rng(seed)
        matrix = 0.1 * np.eye(d_base) + rng.uniform(-0.01, 0.01, size=(d_base, d_base))
        return cls(matrix=matrix)

    def copy(self) -> "CoherenceHead":
        return CoherenceHead(matrix=self.matrix.copy())


def coherence_context(base: np.ndarray, i: int) -> np.ndarray:
    """Context vector at interval i: mean of e_{i-1}, e_i, or e_1 when i = 1.

    There is no u_0 to pad with; truncating at the left edge avoids biasing
    tanh toward 0 through a halved context norm.
    """
    return base[0] if i == 1 else 0.5 * (base[i - 2] + base[i - 1])


def coherence_score(head: CoherenceHead, base: np.ndarray, i: int) -> float:
    """Score interval i (1-based) of a dialogue given its base matrix."""
    base = np.asarray(base, dtype=np.float64)
    n = base.shape[0]
    if not 1 <= i <= n - 1:
        raise InvalidArgumentError(f"interval {i} out of range [1, {n - 1}]")
    if base.shape[1] != head.d_base:
        raise InvalidArgumentError(
            f"base dimension {base.shape[1]} != head dimension {head.d_base}"
        )
    ctx = coherence_context(base, i)
    resp = base[i]
    return float(np.tanh(ctx @ head.matrix @ resp))


def coherence_series(head: CoherenceHead, base: np.ndarray) -> np.ndarray:
    """Scores for every interval; empty for a single-utterance dialogue."""
    base = np.asarray(base, dtype=np.float64)
    n = base.shape[0]
    if n < 2:
        return np.zeros(0, dtype=np.float64)
    return np.array(
        [coherence_score(head, base, i) for i in range(1, n)], dtype=np.float64
    )


class CoherenceScorer(abc.ABC):
    """Pluggable source of the per-interval coherence series."""

    @abc.abstractmethod
    def series(self, dialogue: Dialogue, base: np.ndarray) -> np.ndarray:
        ...


class ZeroCoherence(CoherenceScorer):
    """All-zero coherence: relevance reduces to the topic term."""

    def series(self, dialogue: Dialogue, base: np.ndarray) -> np.ndarray:
        return np.zeros(max(len(dialogue) - 1, 0), dtype=np.float64)


class HeadCoherence(CoherenceScorer):
    def __init__(self, head: CoherenceHead):
        self.head = head

    def series(self, dialogue: Dialogue, base: np.ndarray) -> np.ndarray:
        return coherence_series(self.head, base)


class FileCoherence(CoherenceScorer):
    """Scores read from a JSONL file keyed by (dialogue_id, interval).

    Lines starting with ``#`` are treated as comments (exporters use one to
    document their score convention). Stored values reproduce bit-exactly.
    """

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._table: dict[tuple[str, int], float] = {}
        with open(self._path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    obj = json.loads(line)
                    key = (str(obj["dialogue_id"]), int(obj["interval"]))
                    score = float(obj["score"])
                except (ValueError, KeyError, TypeError) as exc:
                    raise ScoreFileError(f"{self._path}:{lineno}: {exc}") from exc
                if not -1.0 <= score <= 1.0:
                    raise ScoreFileError(
                        f"{self._path}:{lineno}: score {score} outside [-1, 1]"
                    )
                if key[1] < 1:
                    raise ScoreFileError(
                        f"{self._path}:{lineno}: interval {key[1]} is not 1-based"
                    )
                self._table[key] = score

    def series(self, dialogue: Dialogue, base: np.ndarray) -> np.ndarray:
        out = np.zeros(max(len(dialogue) - 1, 0), dtype=np.float64)
        for i in range(1, len(dialogue)):
            try:
                out[i - 1] = self._table[(dialogue.id, i)]
            except KeyError:
                raise MissingScoreError(
                    f"{self._path}: no score for dialogue {dialogue.id!r} interval {i}"
                ) from None
        return out
