"""Head training under the combined ranking objective.

Two hinge losses drive plain SGD over the projection and coherence heads:

* neighbor-matching: for each anchor, every (positive, negative) pair must
  keep cos(h_anchor, h_pos) at least a margin above cos(h_anchor, h_neg);
* relevance modeling: a real interval fragment must outscore its synthetic
  counterpart by the same margin, through the full relevance function.

The total objective averages anchor losses and fragment losses separately
and sums the two means (each term carries a configurable weight; weights of
1 reproduce the plain size-normalized sum). Gradients are analytic, with
the hinge subgradient at the kink taken as 0, and are validated against
central finite differences in the test suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .coherence import CoherenceHead, coherence_series
from .dialogue import Dialogue
from .embeddings import EmbeddingProvider, ProjectionHead
from .errors import InvalidArgumentError, NumericError
from .hashing import derive_seed
from .relevance import relevance_series
from .selfsup import (
    AnchorPairs,
    RmFragmentPair,
    neighbor_only_pairs,
    refined_pairs,
    rm_fragments,
)
from .tiling import TilingConfig, segment_series


@dataclass(frozen=True)
class TrainConfig:
    margin: float = 1.0
    learning_rate: float = 0.01
    epochs: int = 10
    batch_size: int = 32
    refresh_pseudo_every: int = 1
    seed: int = 0
    num_weight: float = 1.0
    rm_weight: float = 1.0
    w: int = 5
    rm_per_interval: int = 1
    d_topic: int = 64
    refine_with_pseudo: bool = True
    grad_check: bool = False

    def __post_init__(self) -> None:
        if self.margin <= 0:
            raise InvalidArgumentError(f"margin must be > 0, got {self.margin}")
        if self.learning_rate < 0:
            raise InvalidArgumentError("learning_rate must be >= 0")
        for name in ("epochs", "batch_size", "refresh_pseudo_every", "w", "rm_per_interval", "d_topic"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        if self.num_weight < 0 or self.rm_weight < 0:
            raise InvalidArgumentError("loss weights must be >= 0")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    num_loss: float
    rm_loss: float
    total_loss: float
    pseudo_boundaries: int
    grad_check: str


@dataclass(frozen=True)
class TrainReport:
    epochs: tuple[EpochStats, ...]


def _cosine_and_grads(
    a: np.ndarray, b: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Cosine plus its partials w.r.t. both arguments; zero-norm inputs give 0s."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0, np.zeros_like(a), np.zeros_like(b)
    inv = 1.0 / (na * nb)
    c = float(a @ b) * inv
    da = b * inv - (c / (na * na)) * a
    db = a * inv - (c / (nb * nb)) * b
    return c, da, db


def _cos(a: np.ndarray, b: np.ndarray) -> float:
    return _cosine_and_grads(a, b)[0]


def num_loss(
    anchor_h: np.ndarray,
    positives_h: np.ndarray,
    negatives_h: np.ndarray,
    margin: float = 1.0,
) -> float:
    """Mean hinge over all (positive, negative) combinations for one anchor."""
    positives_h = np.atleast_2d(np.asarray(positives_h, dtype=np.float64))
    negatives_h = np.atleast_2d(np.asarray(negatives_h, dtype=np.float64))
    if positives_h.shape[0] == 0 or negatives_h.shape[0] == 0:
        raise InvalidArgumentError("anchor with empty positive or negative set")
    pos_sims = np.array([_cos(anchor_h, p) for p in positives_h])
    neg_sims = np.array([_cos(anchor_h, m) for m in negatives_h])
    hinge = margin + neg_sims[None, :] - pos_sims[:, None]
    return float(np.maximum(hinge, 0.0).mean())


def rm_loss(r_plus: float, r_minus: float, margin: float = 1.0) -> float:
    """Hinge pushing the real fragment's relevance above the synthetic one's."""
    return max(0.0, margin + r_minus - r_plus)


def total_loss(
    num_losses: Sequence[float], rm_losses: Sequence[float], cfg: TrainConfig
) -> float:
    """Weighted sum of the two per-task means; an absent task contributes 0."""
    if not num_losses and not rm_losses:
        raise InvalidArgumentError("both loss batches are empty")
    total = 0.0
    if num_losses:
        total += cfg.num_weight * float(np.mean(num_losses))
    if rm_losses:
        total += cfg.rm_weight * float(np.mean(rm_losses))
    return total


@dataclass(eq=False)
class NumSample:
    """One neighbor-matching anchor, bound to its dialogue's base matrix."""

    dialogue_id: str
    base: np.ndarray
    anchor: int
    positives: tuple[int, ...]
    negatives: tuple[int, ...]


@dataclass(eq=False)
class RmSample:
    """One fragment pair; the synthetic right side may come from another dialogue."""

    dialogue_id: str
    base: np.ndarray
    interval: int
    source_id: str
    source_base: np.ndarray
    synthetic_a: int


@dataclass(eq=False)
class HeadGradients:
    weight: np.ndarray
    bias: np.ndarray
    matrix: np.ndarray

    @classmethod
    def zeros_like(cls, proj: ProjectionHead, coh: CoherenceHead) -> "HeadGradients":
        return cls(
            weight=np.zeros_like(proj.weight),
            bias=np.zeros_like(proj.bias),
            matrix=np.zeros_like(coh.matrix),
        )


def num_sample_loss(sample: NumSample, proj: ProjectionHead, margin: float) -> float:
    anchor_h = proj.project(sample.base[sample.anchor - 1])
    pos_h = proj.project_all(sample.base[np.asarray(sample.positives) - 1])
    neg_h = proj.project_all(sample.base[np.asarray(sample.negatives) - 1])
    return num_loss(anchor_h, pos_h, neg_h, margin)


def rm_sample_scores(
    sample: RmSample, proj: ProjectionHead, coh: CoherenceHead
) -> tuple[float, float]:
    """Relevance of the real and synthetic fragments at the sample's interval."""
    base, i = sample.base, sample.interval
    rows = np.array([i - 2, i - 1, i, i + 1])  # utterances i-1 .. i+2
    h = proj.project_all(base[rows])
    left_h = 0.5 * (h[0] + h[1])
    right_h = 0.5 * (h[2] + h[3])
    a = sample.synthetic_a
    synth_h_pair = proj.project_all(sample.source_base[np.array([a - 1, a])])
    synth_h = 0.5 * (synth_h_pair[0] + synth_h_pair[1])
    ctx = 0.5 * (base[i - 2] + base[i - 1])
    resp_real = base[i]
    resp_synth = sample.source_base[a - 1]
    c_plus = float(np.tanh(ctx @ coh.matrix @ resp_real))
    c_minus = float(np.tanh(ctx @ coh.matrix @ resp_synth))
    return _cos(left_h, right_h) + c_plus, _cos(left_h, synth_h) + c_minus


def batch_loss(
    batch: Sequence[NumSample | RmSample],
    proj: ProjectionHead,
    coh: CoherenceHead,
    cfg: TrainConfig,
) -> float:
    """Forward-only value of the batch objective (what the gradients differentiate)."""
    num_losses, rm_losses = [], []
    for sample in batch:
        if isinstance(sample, NumSample):
            num_losses.append(num_sample_loss(sample, proj, cfg.margin))
        else:
            r_plus, r_minus = rm_sample_scores(sample, proj, coh)
            rm_losses.append(rm_loss(r_plus, r_minus, cfg.margin))
    return total_loss(num_losses, rm_losses, cfg)


def _num_sample_gradients(
    sample: NumSample, proj: ProjectionHead, margin: float
) -> tuple[float, np.ndarray, np.ndarray]:
    base = sample.base
    pos = np.asarray(sample.positives)
    neg = np.asarray(sample.negatives)
    e_anchor = base[sample.anchor - 1]
    anchor_h = proj.project(e_anchor)

    pos_data = [_cosine_and_grads(anchor_h, proj.project(base[p - 1])) for p in pos]
    neg_data = [_cosine_and_grads(anchor_h, proj.project(base[m - 1])) for m in neg]
    pos_sims = np.array([d[0] for d in pos_data])
    neg_sims = np.array([d[0] for d in neg_data])
    hinge = margin + neg_sims[None, :] - pos_sims[:, None]
    active = hinge > 0.0
    loss = float(np.maximum(hinge, 0.0).mean())

    scale = 1.0 / hinge.size
    alpha = active.sum(axis=1) * scale  # weight on each positive cosine (negated)
    beta = active.sum(axis=0) * scale  # weight on each negative cosine

    g_anchor = np.zeros_like(anchor_h)
    d_weight = np.zeros_like(proj.weight)
    d_bias = np.zeros_like(proj.bias)
    for j, p in enumerate(pos):
        if alpha[j] == 0.0:
            continue
        _, d_anchor, d_other = pos_data[j]
        g_anchor -= alpha[j] * d_anchor
        g_other = -alpha[j] * d_other
        d_weight += np.outer(g_other, base[p - 1])
        d_bias += g_other
    for k, m in enumerate(neg):
        if beta[k] == 0.0:
            continue
        _, d_anchor, d_other = neg_data[k]
        g_anchor += beta[k] * d_anchor
        g_other = beta[k] * d_other
        d_weight += np.outer(g_other, base[m - 1])
        d_bias += g_other
    d_weight += np.outer(g_anchor, e_anchor)
    d_bias += g_anchor
    return loss, d_weight, d_bias


def _rm_sample_gradients(
    sample: RmSample, proj: ProjectionHead, coh: CoherenceHead, margin: float
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    base, i = sample.base, sample.interval
    rows = np.array([i - 2, i - 1, i, i + 1])
    h = proj.project_all(base[rows])
    left_h = 0.5 * (h[0] + h[1])
    right_h = 0.5 * (h[2] + h[3])
    a = sample.synthetic_a
    synth_rows = np.array([a - 1, a])
    synth_h_pair = proj.project_all(sample.source_base[synth_rows])
    synth_h = 0.5 * (synth_h_pair[0] + synth_h_pair[1])

    ctx = 0.5 * (base[i - 2] + base[i - 1])
    resp_real = base[i]
    resp_synth = sample.source_base[a - 1]
    s_plus = float(ctx @ coh.matrix @ resp_real)
    s_minus = float(ctx @ coh.matrix @ resp_synth)
    c_plus = float(np.tanh(s_plus))
    c_minus = float(np.tanh(s_minus))

    cos_real, d_left_real, d_right_real = _cosine_and_grads(left_h, right_h)
    cos_synth, d_left_synth, d_synth = _cosine_and_grads(left_h, synth_h)
    loss = rm_loss(cos_real + c_plus, cos_synth + c_minus, margin)

    d_weight = np.zeros_like(proj.weight)
    d_bias = np.zeros_like(proj.bias)
    d_matrix = np.zeros_like(coh.matrix)
    if loss == 0.0:
        return loss, d_weight, d_bias, d_matrix

    # d loss / d r_minus = 1, d loss / d r_plus = -1 on the active branch
    g_left = d_left_synth - d_left_real
    g_right = -d_right_real
    g_synth = d_synth
    for offset, row in enumerate(rows):
        g_h = 0.5 * (g_left if offset < 2 else g_right)
        d_weight += np.outer(g_h, base[row])
        d_bias += g_h
    for row in synth_rows:
        g_h = 0.5 * g_synth
        d_weight += np.outer(g_h, sample.source_base[row])
        d_bias += g_h
    d_matrix += (1.0 - c_minus * c_minus) * np.outer(ctx, resp_synth)
    d_matrix -= (1.0 - c_plus * c_plus) * np.outer(ctx, resp_real)
    return loss, d_weight, d_bias, d_matrix


@dataclass(eq=False)
class BatchResult:
    loss: float
    num_losses: list[float]
    rm_losses: list[float]
    grads: HeadGradients


def batch_gradients(
    batch: Sequence[NumSample | RmSample],
    proj: ProjectionHead,
    coh: CoherenceHead,
    cfg: TrainConfig,
) -> BatchResult:
    """Batch objective and its analytic parameter gradients.

    Accumulation follows batch order, so a fixed sample order makes the
    result bitwise reproducible.
    """
    num_count = sum(1 for s in batch if isinstance(s, NumSample))
    rm_count = len(batch) - num_count
    grads = HeadGradients.zeros_like(proj, coh)
    num_losses: list[float] = []
    rm_losses: list[float] = []
    for sample in batch:
        if isinstance(sample, NumSample):
            loss, d_weight, d_bias = _num_sample_gradients(sample, proj, cfg.margin)
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite loss at sample {sample.dialogue_id}:{sample.anchor}"
                )
            factor = cfg.num_weight / num_count
            grads.weight += factor * d_weight
            grads.bias += factor * d_bias
            num_losses.append(loss)
        else:
            loss, d_weight, d_bias, d_matrix = _rm_sample_gradients(
                sample, proj, coh, cfg.margin
            )
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite loss at fragment {sample.dialogue_id}:{sample.interval}"
                )
            factor = cfg.rm_weight / rm_count
            grads.weight += factor * d_weight
            grads.bias += factor * d_bias
            grads.matrix += factor * d_matrix
            rm_losses.append(loss)
    return BatchResult(
        loss=total_loss(num_losses, rm_losses, cfg),
        num_losses=num_losses,
        rm_losses=rm_losses,
        grads=grads,
    )


def _spot_check_gradients(
    batch: Sequence[NumSample | RmSample],
    proj: ProjectionHead,
    coh: CoherenceHead,
    cfg: TrainConfig,
    entries_per_tensor: int = 4,
    step: float = 1e-5,
) -> str:
    """Cheap finite-difference audit of a few random parameter entries."""
    result = batch_gradients(batch, proj, coh, cfg)
    rng = np.random.default_rng(derive_seed(cfg.seed, "grad-check"))
    max_rel = 0.0
    for tensor, grad in (
        (proj.weight, result.grads.weight),
        (proj.bias, result.grads.bias),
        (coh.matrix, result.grads.matrix),
    ):
        flat = tensor.reshape(-1)
        grad_flat = grad.reshape(-1)
        for idx in rng.choice(flat.size, size=min(entries_per_tensor, flat.size), replace=False):
            original = flat[idx]
            flat[idx] = original + step
            up = batch_loss(batch, proj, coh, cfg)
            flat[idx] = original - step
            down = batch_loss(batch, proj, coh, cfg)
            flat[idx] = original
            numeric = (up - down) / (2 * step)
            denom = max(abs(numeric), abs(grad_flat[idx]), 1.0)
            max_rel = max(max_rel, abs(numeric - grad_flat[idx]) / denom)
    return f"ok(max_rel={max_rel:.2e})" if max_rel < 1e-4 else f"FAIL(max_rel={max_rel:.2e})"


def _chunks(items: list, size: int) -> list[list]:
    return [items[i : i + size] for i in range(0, len(items), size)]


def build_samples(
    corpus: Sequence[Dialogue],
    base_by_id: dict[str, np.ndarray],
    pair_sets: dict[str, tuple[AnchorPairs, ...]],
    fragments: Sequence[RmFragmentPair],
) -> list[NumSample | RmSample]:
    samples: list[NumSample | RmSample] = []
    for dialogue in corpus:
        for pairs in pair_sets.get(dialogue.id, ()):
            samples.append(
                NumSample(
                    dialogue_id=dialogue.id,
                    base=base_by_id[dialogue.id],
                    anchor=pairs.anchor,
                    positives=pairs.positives,
                    negatives=pairs.negatives,
                )
            )
    for frag in fragments:
        samples.append(
            RmSample(
                dialogue_id=frag.dialogue_id,
                base=base_by_id[frag.dialogue_id],
                interval=frag.interval,
                source_id=frag.synthetic_source,
                source_base=base_by_id[frag.synthetic_source],
                synthetic_a=frag.synthetic_right[0],
            )
        )
    return samples


def train(
    corpus: Sequence[Dialogue],
    provider: EmbeddingProvider,
    cfg: TrainConfig = TrainConfig(),
    tiling: TilingConfig = TilingConfig(),
) -> tuple[ProjectionHead, CoherenceHead, TrainReport]:
    """Fit both heads on an unlabeled corpus.

    Each epoch: refresh the pseudo-segmentation from a snapshot of the
    current heads (on the configured cadence), mine pairs and fragments,
    then run minibatch SGD. Fully deterministic given (corpus, config).
    """
    if not corpus:
        raise InvalidArgumentError("training corpus is empty")
    base_by_id = {d.id: provider.embed_matrix(d) for d in corpus}
    d_base = next(iter(base_by_id.values())).shape[1]
    proj = ProjectionHead.initialize(
        d_base, cfg.d_topic, seed=derive_seed(cfg.seed, "projection-init")
    )
    coh = CoherenceHead.initialize(d_base, seed=derive_seed(cfg.seed, "coherence-init"))

    # fragments depend only on (corpus, seed), so one draw serves every epoch;
    # this also keeps per-epoch losses constant under learning_rate = 0
    fragments = rm_fragments(
        corpus, seed=derive_seed(cfg.seed, "rm-fragments"), per_interval=cfg.rm_per_interval
    )

    stats: list[EpochStats] = []
    pair_sets: dict[str, tuple[AnchorPairs, ...]] = {}
    pseudo_boundaries = 0
    for epoch in range(1, cfg.epochs + 1):
        if (epoch - 1) % cfg.refresh_pseudo_every == 0:
            proj_snap, coh_snap = proj.copy(), coh.copy()
            pseudo_boundaries = 0
            pair_sets = {}
            for dialogue in corpus:
                base = base_by_id[dialogue.id]
                if len(dialogue) < 2:
                    pair_sets[dialogue.id] = ()
                    continue
                series = relevance_series(
                    proj_snap.project_all(base), coherence_series(coh_snap, base)
                )
                pseudo = segment_series(series.scores, tiling)
                pseudo_boundaries += len(pseudo.boundaries)
                if cfg.refine_with_pseudo:
                    pair_sets[dialogue.id] = refined_pairs(len(dialogue), cfg.w, pseudo)
                else:
                    pair_sets[dialogue.id] = neighbor_only_pairs(len(dialogue), cfg.w)
        samples = build_samples(corpus, base_by_id, pair_sets, fragments)
        order = np.random.default_rng(
            derive_seed(cfg.seed, f"order-epoch-{epoch}")
        ).permutation(len(samples))
        shuffled = [samples[i] for i in order]

        epoch_num: list[float] = []
        epoch_rm: list[float] = []
        check_status = "skipped"
        for batch_index, batch in enumerate(_chunks(shuffled, cfg.batch_size)):
            if cfg.grad_check and batch_index == 0:
                check_status = _spot_check_gradients(batch, proj, coh, cfg)
            result = batch_gradients(batch, proj, coh, cfg)
            proj.weight -= cfg.learning_rate * result.grads.weight
            proj.bias -= cfg.learning_rate * result.grads.bias
            coh.matrix -= cfg.learning_rate * result.grads.matrix
            epoch_num.extend(result.num_losses)
            epoch_rm.extend(result.rm_losses)
        mean_num = float(np.mean(epoch_num)) if epoch_num else 0.0
        mean_rm = float(np.mean(epoch_rm)) if epoch_rm else 0.0
        stats.append(
            EpochStats(
                epoch=epoch,
                num_loss=mean_num,
                rm_loss=mean_rm,
                total_loss=cfg.num_weight * mean_num + cfg.rm_weight * mean_rm,
                pseudo_boundaries=pseudo_boundaries,
                grad_check=check_status,
            )
        )
    return proj, coh, TrainReport(epochs=tuple(stats))


def initial_heads(
    d_base: int, cfg: TrainConfig
) -> tuple[ProjectionHead, CoherenceHead]:
    """The exact head state ``train`` starts from (for pre-training baselines)."""
    proj = ProjectionHead.initialize(
        d_base, cfg.d_topic, seed=derive_seed(cfg.seed, "projection-init")
    )
    coh = CoherenceHead.initialize(d_base, seed=derive_seed(cfg.seed, "coherence-init"))
    return proj, coh


def save_heads(path: str | Path, proj: ProjectionHead, coh: CoherenceHead) -> None:
    if coh.d_base != proj.d_base:
        raise InvalidArgumentError(
            f"head dimensions disagree: projection d_base={proj.d_base}, "
            f"coherence d_base={coh.d_base}"
        )
    obj = {
        "d_base": proj.d_base,
        "d_topic": proj.d_topic,
        "weight": proj.weight.tolist(),
        "bias": proj.bias.tolist(),
        "M": coh.matrix.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_heads(path: str | Path) -> tuple[ProjectionHead, CoherenceHead]:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    proj = ProjectionHead(weight=np.array(obj["weight"]), bias=np.array(obj["bias"]))
    coh = CoherenceHead(matrix=np.array(obj["M"]))
    if proj.d_base != int(obj["d_base"]) or proj.d_topic != int(obj["d_topic"]):
        raise InvalidArgumentError(f"{path}: declared dimensions do not match arrays")
    if coh.d_base != proj.d_base:
        raise InvalidArgumentError(f"{path}: coherence matrix dimension mismatch")
    return proj, coh
