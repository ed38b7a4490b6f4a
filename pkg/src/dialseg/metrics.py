"""Segmentation error metrics: Pk and WindowDiff.

Both slide a window of size k over utterance positions. Pk counts positions
where reference and hypothesis disagree about whether the window endpoints
share a segment; WindowDiff counts positions where the number of boundaries
inside the window differs. Lower is better; identical segmentations score 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .dialogue import Segmentation
from .errors import EvaluationError, InvalidArgumentError


@dataclass(frozen=True)
class MetricResult:
    """Scores for one dialogue, with the window size used to compute them."""

    pk: float
    window_diff: float
    k: int


@dataclass(frozen=True)
class CorpusMetrics:
    """Corpus scores: unweighted mean of the per-dialogue results."""

    pk: float
    window_diff: float
    per_dialogue: dict[str, MetricResult]


def window_size(reference: Segmentation) -> int:
    """Half the mean reference segment length, round-half-up, clamped to [1, n-1]."""
    n = reference.n
    k = math.floor(n / (2 * reference.segment_count) + 0.5)
    return min(max(k, 1), max(n - 1, 1))


def _check_pair(reference: Segmentation, hypothesis: Segmentation, k: int) -> None:
    if reference.n != hypothesis.n:
        raise InvalidArgumentError(
            f"segmentations cover different lengths: {reference.n} vs {hypothesis.n}"
        )
    if not 1 <= k < reference.n:
        raise InvalidArgumentError(f"window size {k} out of range [1, {reference.n - 1}]")


def pk(reference: Segmentation, hypothesis: Segmentation, k: int) -> float:
    """Disagreement rate on same-segment judgments at distance k."""
    _check_pair(reference, hypothesis, k)
    n = reference.n
    errors = sum(
        1
        for i in range(1, n - k + 1)
        if reference.same_segment(i, i + k) != hypothesis.same_segment(i, i + k)
    )
    return errors / (n - k)


def _boundaries_within(seg: Segmentation, i: int, k: int) -> int:
    return sum(1 for b in seg.boundaries if i <= b < i + k)


def window_diff(reference: Segmentation, hypothesis: Segmentation, k: int) -> float:
    """Rate of windows whose boundary counts differ between the segmentations."""
    _check_pair(reference, hypothesis, k)
    n = reference.n
    errors = sum(
        1
        for i in range(1, n - k + 1)
        if _boundaries_within(reference, i, k) != _boundaries_within(hypothesis, i, k)
    )
    return errors / (n - k)


def evaluate_dialogue(reference: Segmentation, hypothesis: Segmentation) -> MetricResult:
    """Score one dialogue with k derived from the reference segmentation."""
    if reference.n == 1:
        # No intervals exist; both segmentations are necessarily empty.
        return MetricResult(pk=0.0, window_diff=0.0, k=1)
    k = window_size(reference)
    return MetricResult(
        pk=pk(reference, hypothesis, k),
        window_diff=window_diff(reference, hypothesis, k),
        k=k,
    )


def evaluate_corpus(
    references: Mapping[str, Segmentation], hypotheses: Mapping[str, Segmentation]
) -> CorpusMetrics:
    """Macro-average metrics over dialogues aligned by id.

    Every reference id must have a hypothesis and vice versa; each
    dialogue's k comes from its own reference.
    """
    missing = sorted(set(references) - set(hypotheses))
    extra = sorted(set(hypotheses) - set(references))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing hypotheses for: {', '.join(missing)}")
        if extra:
            parts.append(f"hypotheses without references: {', '.join(extra)}")
        raise EvaluationError("; ".join(parts))
    if not references:
        raise EvaluationError("nothing to evaluate: empty reference set")
    per = {
        did: evaluate_dialogue(references[did], hypotheses[did])
        for did in sorted(references)
    }
    return CorpusMetrics(
        pk=sum(r.pk for r in per.values()) / len(per),
        window_diff=sum(r.window_diff for r in per.values()) / len(per),
        per_dialogue=per,
    )
