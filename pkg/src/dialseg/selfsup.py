"""Self-supervision data mining.

Two kinds of training data come out of unlabeled dialogues:

* Neighbor-matching pairs: for each anchor utterance, nearby utterances are
  assumed topically similar and distant ones dissimilar; intersecting the
  distance relation with the current pseudo-segmentation refines both sets.
* Relevance fragments: a real interval fragment (the exact scoring windows
  around an interval) paired with a synthetic one whose right side is
  replaced by a contiguous utterance pair, sampled either from the same
  dialogue (disjoint from the real window) or from another dialogue.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dialogue import Dialogue, Segmentation
from .errors import GenerationError, InvalidArgumentError
from .hashing import derive_seed

SCHEME_INTRA = "intra"
SCHEME_CROSS = "cross"


def neighbor_sets(n: int, i: int, w: int) -> tuple[frozenset[int], frozenset[int]]:
    """Indices within distance w of anchor i, and those strictly beyond it."""
    if not 1 <= i <= n:
        raise InvalidArgumentError(f"anchor {i} out of range [1, {n}]")
    if w < 1:
        raise InvalidArgumentError(f"window w must be >= 1, got {w}")
    near = frozenset(j for j in range(1, n + 1) if j != i and abs(i - j) <= w)
    far = frozenset(j for j in range(1, n + 1) if abs(i - j) > w)
    return near, far


def pseudo_segment_sets(
    seg: Segmentation, i: int
) -> tuple[frozenset[int], frozenset[int]]:
    """Indices sharing i's (pseudo) segment, minus i, and all the others."""
    _, (first, last) = seg.segment_of(i)
    inside = frozenset(j for j in range(first, last + 1) if j != i)
    outside = frozenset(range(1, seg.n + 1)) - inside - {i}
    return inside, outside


@dataclass(frozen=True)
class AnchorPairs:
    """Refined positive/negative utterance indices for one anchor."""

    anchor: int
    positives: tuple[int, ...]
    negatives: tuple[int, ...]


def refined_pairs(n: int, w: int, seg: Segmentation) -> tuple[AnchorPairs, ...]:
    """Positives = neighbors inside the anchor's pseudo segment; negatives =
    non-neighbors outside it.

    Anchors where either set comes out empty contribute no loss and are
    dropped here.
    """
    if seg.n != n:
        raise InvalidArgumentError(f"segmentation is for n={seg.n}, expected {n}")
    out = []
    for i in range(1, n + 1):
        near, far = neighbor_sets(n, i, w)
        inside, outside = pseudo_segment_sets(seg, i)
        pos = near & inside
        neg = far & outside
        if pos and neg:
            out.append(
                AnchorPairs(anchor=i, positives=tuple(sorted(pos)), negatives=tuple(sorted(neg)))
            )
    return tuple(out)


def neighbor_only_pairs(n: int, w: int) -> tuple[AnchorPairs, ...]:
    """Distance-only pairs (no pseudo-segmentation refinement)."""
    out = []
    for i in range(1, n + 1):
        near, far = neighbor_sets(n, i, w)
        if near and far:
            out.append(
                AnchorPairs(anchor=i, positives=tuple(sorted(near)), negatives=tuple(sorted(far)))
            )
    return tuple(out)


@dataclass(frozen=True)
class RmFragmentPair:
    """A real interval fragment and its synthetic counterpart.

    The real fragment is the exact relevance window at ``interval``; the
    synthetic one keeps the left side and swaps the right-side utterances
    (interval+1, interval+2) for the contiguous pair ``synthetic_right``
    taken from ``synthetic_source``.
    """

    dialogue_id: str
    interval: int
    real_right: tuple[int, int]
    synthetic_source: str
    synthetic_right: tuple[int, int]
    scheme: str


def _eligible_intervals(n: int) -> range:
    # Full scoring window needs utterances i-1 .. i+2.
    return range(2, n - 1)


def _intra_candidates(n: int, i: int) -> list[int]:
    window = {i - 1, i, i + 1, i + 2}
    return [a for a in range(1, n) if not ({a, a + 1} & window)]


def rm_fragments(
    corpus: Sequence[Dialogue], seed: int, per_interval: int = 1
) -> list[RmFragmentPair]:
    """Sample real/synthetic fragment pairs for every eligible interval.

    Scheme is a fair coin between intra- and cross-dialogue sampling; a
    scheme that is impossible for a given interval (no disjoint in-dialogue
    pair, or a single-dialogue corpus) forces the other one. Each dialogue
    draws from its own seeded stream, so ordering is reproducible.
    """
    if per_interval < 1:
        raise InvalidArgumentError(f"per_interval must be >= 1, got {per_interval}")
    cross_sources = {d.id: [o for o in corpus if o.id != d.id and len(o) >= 2] for d in corpus}
    out: list[RmFragmentPair] = []
    for dialogue in corpus:
        n = len(dialogue)
        rng = np.random.default_rng(derive_seed(seed, dialogue.id))
        sources = cross_sources[dialogue.id]
        for i in _eligible_intervals(n):
            intra = _intra_candidates(n, i)
            for _ in range(per_interval):
                can_intra = bool(intra)
                can_cross = bool(sources)
                if not can_intra and not can_cross:
                    raise GenerationError(
                        f"dialogue {dialogue.id!r} interval {i}: no disjoint "
                        "in-dialogue pair and no other dialogue to sample from"
                    )
                if can_intra and can_cross:
                    scheme = SCHEME_INTRA if rng.random() < 0.5 else SCHEME_CROSS
                else:
                    scheme = SCHEME_INTRA if can_intra else SCHEME_CROSS
                if scheme == SCHEME_INTRA:
                    a = intra[int(rng.integers(len(intra)))]
                    source_id = dialogue.id
                else:
                    source = sources[int(rng.integers(len(sources)))]
                    a = int(rng.integers(1, len(source)))
                    source_id = source.id
                out.append(
                    RmFragmentPair(
                        dialogue_id=dialogue.id,
                        interval=i,
                        real_right=(i + 1, i + 2),
                        synthetic_source=source_id,
                        synthetic_right=(a, a + 1),
                        scheme=scheme,
                    )
                )
    return out
