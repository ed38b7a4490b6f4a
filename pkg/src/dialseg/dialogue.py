"""Core value types: dialogues, segmentations, and segment membership.

Indexing is 1-based everywhere: utterances are u_1..u_n and interval i sits
between u_i and u_{i+1}. A boundary at interval b splits the dialogue between
u_b and u_{b+1}. Serialized formats use the same convention.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class Segmentation:
    """A strictly increasing set of boundary intervals over ``n`` utterances.

    An empty boundary tuple means the dialogue is a single segment; the
    segment count is always ``len(boundaries) + 1``.
    """

    boundaries: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundaries", tuple(int(b) for b in self.boundaries))
        object.__setattr__(self, "n", int(self.n))
        if self.n < 1:
            raise InvalidArgumentError(f"utterance count must be >= 1, got {self.n}")
        prev = 0
        for b in self.boundaries:
            if not 1 <= b <= self.n - 1:
                raise InvalidArgumentError(
                    f"boundary {b} out of range [1, {self.n - 1}] for n={self.n}"
                )
            if b <= prev:
                raise InvalidArgumentError(
                    f"boundaries must be strictly increasing, got {self.boundaries}"
                )
            prev = b

    @property
    def segment_count(self) -> int:
        return len(self.boundaries) + 1

    def _check_utterance(self, index: int) -> None:
        if not 1 <= index <= self.n:
            raise InvalidArgumentError(
                f"utterance index {index} out of range [1, {self.n}]"
            )

    def segment_of(self, utt_index: int) -> tuple[int, tuple[int, int]]:
        """Locate the segment containing ``utt_index``.

        Returns ``(ordinal, (first, last))`` where ``ordinal`` counts
        segments from 1 and ``first..last`` is the inclusive utterance range.
        The ranges returned over all indices partition ``[1, n]``.
        """
        self._check_utterance(utt_index)
        start = 1
        for ordinal, b in enumerate(self.boundaries, start=1):
            if utt_index <= b:
                return ordinal, (start, b)
            start = b + 1
        return len(self.boundaries) + 1, (start, self.n)

    def same_segment(self, i: int, j: int) -> bool:
        """True iff no boundary separates utterances ``i`` and ``j``."""
        self._check_utterance(i)
        self._check_utterance(j)
        lo, hi = (i, j) if i <= j else (j, i)
        return not any(lo <= b < hi for b in self.boundaries)


@dataclass(frozen=True)
class Dialogue:
    """An ordered sequence of utterance texts, optionally with gold boundaries."""

    id: str
    utterances: tuple[str, ...]
    gold_boundaries: Segmentation | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "utterances", tuple(str(u) for u in self.utterances))
        if not self.id:
            raise InvalidArgumentError("dialogue id must be non-empty")
        if len(self.utterances) < 1:
            raise InvalidArgumentError(f"dialogue {self.id!r} has no utterances")
        for pos, text in enumerate(self.utterances, start=1):
            if not text.strip():
                raise InvalidArgumentError(
                    f"dialogue {self.id!r}: utterance {pos} is blank"
                )
        if self.gold_boundaries is not None and self.gold_boundaries.n != len(self.utterances):
            raise InvalidArgumentError(
                f"dialogue {self.id!r}: gold segmentation is for n="
                f"{self.gold_boundaries.n}, dialogue has n={len(self.utterances)}"
            )

    def __len__(self) -> int:
        return len(self.utterances)

    @property
    def interval_count(self) -> int:
        return len(self.utterances) - 1
