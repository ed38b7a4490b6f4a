"""Command-line interface.

Subcommands: ``synth`` (generate a benchmark corpus), ``segment`` (predict
boundaries), ``eval`` (Pk/WindowDiff against gold), ``mine`` (inspect
self-supervision pairs), ``train`` (fit heads), and ``score-dump``
(per-interval scores as CSV plus rendered figures).

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .coherence import CoherenceScorer, FileCoherence, HeadCoherence, ZeroCoherence
from .corpus import (
    SyntheticSpec,
    generate_synthetic,
    load_corpus,
    load_predictions,
    save_corpus,
)
from .dialogue import Segmentation
from .embeddings import (
    EmbeddingProvider,
    HttpServiceProvider,
    LexicalHashProvider,
    PrecomputedFileProvider,
    ProjectionHead,
)
from .errors import (
    DataError,
    EvaluationError,
    InvalidArgumentError,
    NumericError,
    UsageError,
)
from .metrics import evaluate_corpus
from .pipeline import Segmenter
from .selfsup import neighbor_only_pairs, refined_pairs, rm_fragments
from .tiling import STATS_OVER_CHOICES, TilingConfig, boundary_threshold
from .trainer import TrainConfig, load_heads, save_heads, train


def make_provider(spec: str, d_base: int, lexical_seed: int) -> EmbeddingProvider:
    if spec == "lexical":
        return LexicalHashProvider(d_base=d_base, seed=lexical_seed)
    if spec.startswith("file:"):
        path = Path(spec[len("file:") :])
        if not path.exists():
            raise DataError(
                f"embedding file {path} does not exist "
                "(generate one with an exporter or check the path)"
            )
        return PrecomputedFileProvider(path)
    if spec.startswith(("http://", "https://")):
        return HttpServiceProvider(spec)
    raise UsageError(
        f"unknown provider {spec!r}; use 'lexical', 'file:PATH', or an http(s) URL"
    )


def _add_provider_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--provider",
        default="lexical",
        help="embedding source: lexical | file:PATH | http(s)://URL (default: lexical)",
    )
    parser.add_argument(
        "--d-base", type=int, default=256, help="lexical hash dimension (default: 256)"
    )
    parser.add_argument(
        "--lexical-seed",
        type=int,
        default=0,
        help="seed of the lexical hashing provider (default: 0)",
    )


def _add_tiling_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--smoothing", type=int, default=1, help="odd moving-average width (default: 1 = off)"
    )
    parser.add_argument(
        "--alpha", type=float, default=0.5, help="depth threshold alpha (default: 0.5)"
    )
    parser.add_argument(
        "--min-seg-utts",
        type=int,
        default=1,
        help="minimum utterances per segment (default: 1)",
    )
    parser.add_argument(
        "--stats-over",
        choices=STATS_OVER_CHOICES,
        default="positive",
        help="depth population for the threshold statistics (default: positive)",
    )


def _add_scoring_args(parser: argparse.ArgumentParser) -> None:
    _add_provider_args(parser)
    _add_tiling_args(parser)
    parser.add_argument("--head", help="trained head parameter file (JSON)")
    parser.add_argument(
        "--coherence",
        default=None,
        help="coherence source: zero | head | file:PATH "
        "(default: head when --head is given, else zero)",
    )
    parser.add_argument(
        "--no-topic",
        action="store_true",
        help="drop the topic term and score by coherence alone",
    )


def _tiling_from_args(args: argparse.Namespace) -> TilingConfig:
    try:
        return TilingConfig(
            smoothing_window=args.smoothing,
            threshold_alpha=args.alpha,
            min_segment_utterances=args.min_seg_utts,
            stats_over=args.stats_over,
        )
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from exc


def build_segmenter(args: argparse.Namespace) -> Segmenter:
    provider = make_provider(args.provider, args.d_base, args.lexical_seed)
    topic_head: ProjectionHead | None = None
    head_coherence = None
    if args.head:
        topic_head, head_coherence = load_heads(args.head)
        if provider.d_base is not None and provider.d_base != topic_head.d_base:
            raise UsageError(
                f"head file expects d_base={topic_head.d_base} but the provider "
                f"produces {provider.d_base}; adjust --d-base or the provider"
            )
    choice = args.coherence or ("head" if args.head else "zero")
    coherence: CoherenceScorer
    if choice == "zero":
        coherence = ZeroCoherence()
    elif choice == "head":
        if head_coherence is None:
            raise UsageError("--coherence head requires --head FILE")
        coherence = HeadCoherence(head_coherence)
    elif choice.startswith("file:"):
        path = Path(choice[len("file:") :])
        if not path.exists():
            raise DataError(f"coherence score file {path} does not exist")
        coherence = FileCoherence(path)
    else:
        raise UsageError(
            f"unknown coherence source {choice!r}; use zero, head, or file:PATH"
        )
    return Segmenter(
        provider=provider,
        topic_head=topic_head,
        coherence=coherence,
        tiling=_tiling_from_args(args),
        use_topic=not args.no_topic,
    )


def _open_out(path: str | None):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def cmd_synth(args: argparse.Namespace) -> int:
    fields: dict = {}
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            fields = json.load(fh)
        if "vocabulary" in fields and fields["vocabulary"] is not None:
            fields["vocabulary"] = tuple(tuple(pool) for pool in fields["vocabulary"])
        for key in ("segments_range", "utterances_range", "tokens_per_utterance"):
            if key in fields:
                fields[key] = tuple(fields[key])
    if args.dialogues is not None:
        fields["dialogues"] = args.dialogues
    if args.seed is not None:
        fields["seed"] = args.seed
    if args.overlap is not None:
        fields["adjacent_overlap"] = args.overlap
    try:
        spec = SyntheticSpec(**fields)
    except (TypeError, InvalidArgumentError) as exc:
        raise UsageError(f"bad synthetic spec: {exc}") from exc
    corpus = generate_synthetic(spec)
    save_corpus(args.out, corpus)
    print(f"wrote {len(corpus)} dialogues to {args.out}")
    return 0


def cmd_segment(args: argparse.Namespace) -> int:
    segmenter = build_segmenter(args)
    dialogues = load_corpus(args.corpus)
    predictions = segmenter.segment_corpus(dialogues, jobs=args.jobs)
    out = _open_out(args.out)
    try:
        for dialogue in dialogues:
            seg = predictions[dialogue.id]
            out.write(
                json.dumps({"id": dialogue.id, "boundaries": list(seg.boundaries)}) + "\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    if args.dump_depth:
        with open(args.dump_depth, "w", encoding="utf-8") as fh:
            for dialogue in dialogues:
                if len(dialogue) < 2:
                    continue
                series, depths = segmenter.scores_for(dialogue)
                for idx in range(len(series)):
                    fh.write(
                        json.dumps(
                            {
                                "dialogue_id": dialogue.id,
                                "interval": idx + 1,
                                "r": float(series.scores[idx]),
                                "topic_sim": float(series.topic_sim[idx]),
                                "coherence": float(series.coherence[idx]),
                                "depth": float(depths[idx]),
                            }
                        )
                        + "\n"
                    )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    dialogues = load_corpus(args.ref)
    missing_gold = [d.id for d in dialogues if d.gold_boundaries is None]
    if missing_gold:
        raise EvaluationError(
            f"reference dialogues without gold boundaries: {', '.join(missing_gold)}"
        )
    references = {d.id: d.gold_boundaries for d in dialogues}
    lengths = {d.id: len(d) for d in dialogues}
    raw = load_predictions(args.hyp)
    hypotheses: dict[str, Segmentation] = {}
    for did, boundaries in raw.items():
        if did not in lengths:
            continue  # surfaced as an alignment error below
        try:
            hypotheses[did] = Segmentation(tuple(boundaries), n=lengths[did])
        except InvalidArgumentError as exc:
            raise EvaluationError(f"hypothesis for {did!r} is invalid: {exc}") from exc
    extra = sorted(set(raw) - set(lengths))
    if extra:
        raise EvaluationError(f"hypotheses without references: {', '.join(extra)}")
    result = evaluate_corpus(references, hypotheses)
    if args.verbose:
        for did in sorted(result.per_dialogue):
            r = result.per_dialogue[did]
            print(f"{did}  pk={100 * r.pk:.2f}%  wd={100 * r.window_diff:.2f}%  k={r.k}")
    print(f"Pk: {100 * result.pk:.2f}%")
    print(f"WindowDiff: {100 * result.window_diff:.2f}%")
    return 0


def cmd_mine(args: argparse.Namespace) -> int:
    segmenter = build_segmenter(args)
    dialogues = load_corpus(args.corpus)
    out = _open_out(args.out)
    try:
        for dialogue in dialogues:
            if args.no_pseudo:
                pair_sets = neighbor_only_pairs(len(dialogue), args.w)
            else:
                pseudo = segmenter.segment_dialogue(dialogue)
                pair_sets = refined_pairs(len(dialogue), args.w, pseudo)
            for pairs in pair_sets:
                out.write(
                    json.dumps(
                        {
                            "anchor": {"dialogue_id": dialogue.id, "i": pairs.anchor},
                            "pos": list(pairs.positives),
                            "neg": list(pairs.negatives),
                        }
                    )
                    + "\n"
                )
        for frag in rm_fragments(dialogues, seed=args.seed, per_interval=args.per_interval):
            out.write(
                json.dumps(
                    {
                        "dialogue_id": frag.dialogue_id,
                        "interval": frag.interval,
                        "scheme": frag.scheme,
                        "real_right": list(frag.real_right),
                        "synthetic_source": frag.synthetic_source,
                        "synthetic_right": list(frag.synthetic_right),
                    }
                )
                + "\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    provider = make_provider(args.provider, args.d_base, args.lexical_seed)
    dialogues = load_corpus(args.corpus)
    try:
        cfg = TrainConfig(
            margin=args.margin,
            learning_rate=args.lr,
            epochs=args.epochs,
            batch_size=args.batch_size,
            refresh_pseudo_every=args.refresh_pseudo_every,
            seed=args.seed,
            num_weight=args.num_weight,
            rm_weight=args.rm_weight,
            w=args.w,
            rm_per_interval=args.per_interval,
            d_topic=args.d_topic,
            refine_with_pseudo=not args.no_pseudo,
            grad_check=args.grad_check,
        )
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from exc
    proj, coh, report = train(dialogues, provider, cfg, tiling=_tiling_from_args(args))
    save_heads(args.out, proj, coh)
    for stats in report.epochs:
        line = (
            f"epoch {stats.epoch}/{cfg.epochs}  num={stats.num_loss:.4f}  "
            f"rm={stats.rm_loss:.4f}  total={stats.total_loss:.4f}  "
            f"pseudo_boundaries={stats.pseudo_boundaries}"
        )
        if stats.grad_check != "skipped":
            line += f"  grad_check={stats.grad_check}"
        print(line)
    print(f"wrote heads to {args.out}")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(
                [
                    {
                        "epoch": s.epoch,
                        "num_loss": s.num_loss,
                        "rm_loss": s.rm_loss,
                        "total_loss": s.total_loss,
                        "pseudo_boundaries": s.pseudo_boundaries,
                        "grad_check": s.grad_check,
                    }
                    for s in report.epochs
                ],
                fh,
                indent=2,
            )
            fh.write("\n")
    return 0


def cmd_score_dump(args: argparse.Namespace) -> int:
    segmenter = build_segmenter(args)
    dialogues = load_corpus(args.corpus)
    plot_dir: Path | None = None
    if not args.no_plots:
        plot_dir = Path(args.plot_dir) if args.plot_dir else Path(args.out).with_suffix("") / "figures"
        plot_dir.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dialogue_id", "interval", "r", "topic_sim", "coherence", "depth"])
        for dialogue in dialogues:
            if len(dialogue) < 2:
                continue
            series, depths = segmenter.scores_for(dialogue)
            for idx in range(len(series)):
                writer.writerow(
                    [
                        dialogue.id,
                        idx + 1,
                        repr(float(series.scores[idx])),
                        repr(float(series.topic_sim[idx])),
                        repr(float(series.coherence[idx])),
                        repr(float(depths[idx])),
                    ]
                )
            if plot_dir is not None:
                from .plotting import render_dialogue_scores
                from .tiling import segment_series

                seg = segment_series(series.scores, segmenter.tiling)
                gold = (
                    dialogue.gold_boundaries.boundaries
                    if dialogue.gold_boundaries is not None
                    else None
                )
                render_dialogue_scores(
                    plot_dir / f"{dialogue.id}.png",
                    dialogue.id,
                    series,
                    depths,
                    boundaries=seg.boundaries,
                    gold=gold,
                    threshold=boundary_threshold(depths, segmenter.tiling),
                )
    if plot_dir is not None:
        print(f"wrote {args.out} and figures to {plot_dir}")
    else:
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialseg",
        description="Unsupervised dialogue topic segmentation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_synth = sub.add_parser("synth", help="generate a synthetic gold-annotated corpus")
    p_synth.add_argument("--spec", help="JSON file with SyntheticSpec fields")
    p_synth.add_argument("--dialogues", type=int, help="override dialogue count")
    p_synth.add_argument("--seed", type=int, help="override generation seed")
    p_synth.add_argument(
        "--overlap", type=float, help="override adjacent-topic vocabulary overlap"
    )
    p_synth.add_argument("--out", required=True, help="output corpus JSONL")
    p_synth.set_defaults(func=cmd_synth)

    p_seg = sub.add_parser("segment", help="predict boundaries for a corpus")
    p_seg.add_argument("--corpus", required=True, help="corpus JSONL")
    _add_scoring_args(p_seg)
    p_seg.add_argument("--out", help="predictions JSONL (default: stdout)")
    p_seg.add_argument(
        "--dump-depth", help="also write per-interval relevance/depth JSONL here"
    )
    p_seg.add_argument(
        "--jobs",
        type=int,
        default=os.cpu_count() or 1,
        help="parallel dialogues (default: available cores)",
    )
    p_seg.set_defaults(func=cmd_segment)

    p_eval = sub.add_parser("eval", help="score predictions against gold boundaries")
    p_eval.add_argument("--ref", required=True, help="gold corpus JSONL")
    p_eval.add_argument("--hyp", required=True, help="predictions JSONL")
    p_eval.add_argument("--verbose", action="store_true", help="per-dialogue breakdown")
    p_eval.set_defaults(func=cmd_eval)

    p_mine = sub.add_parser("mine", help="dump self-supervision pairs and fragments")
    p_mine.add_argument("--corpus", required=True)
    _add_scoring_args(p_mine)
    p_mine.add_argument("--w", type=int, default=5, help="neighbor window (default: 5)")
    p_mine.add_argument("--seed", type=int, default=0)
    p_mine.add_argument("--per-interval", type=int, default=1)
    p_mine.add_argument(
        "--no-pseudo",
        action="store_true",
        help="skip pseudo-segmentation refinement (distance-only pairs)",
    )
    p_mine.add_argument("--out", help="output JSONL (default: stdout)")
    p_mine.set_defaults(func=cmd_mine)

    p_train = sub.add_parser("train", help="fit projection and coherence heads")
    p_train.add_argument("--corpus", required=True)
    _add_provider_args(p_train)
    _add_tiling_args(p_train)
    p_train.add_argument("--epochs", type=int, default=10)
    p_train.add_argument("--lr", type=float, default=0.01)
    p_train.add_argument("--margin", type=float, default=1.0)
    p_train.add_argument("--w", type=int, default=5, help="neighbor window (default: 5)")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--num-weight", type=float, default=1.0)
    p_train.add_argument("--rm-weight", type=float, default=1.0)
    p_train.add_argument("--batch-size", type=int, default=32)
    p_train.add_argument("--refresh-pseudo-every", type=int, default=1)
    p_train.add_argument("--per-interval", type=int, default=1)
    p_train.add_argument("--d-topic", type=int, default=64)
    p_train.add_argument("--no-pseudo", action="store_true")
    p_train.add_argument(
        "--grad-check",
        action="store_true",
        help="finite-difference audit of each epoch's first batch",
    )
    p_train.add_argument("--out", required=True, help="head parameter file (JSON)")
    p_train.add_argument("--report", help="per-epoch training report (JSON)")
    p_train.set_defaults(func=cmd_train)

    p_dump = sub.add_parser(
        "score-dump", help="per-interval scores as CSV plus figures"
    )
    p_dump.add_argument("--corpus", required=True)
    _add_scoring_args(p_dump)
    p_dump.add_argument("--out", required=True, help="output CSV")
    p_dump.add_argument(
        "--plot-dir", help="figure directory (default: <out without suffix>/figures)"
    )
    p_dump.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p_dump.set_defaults(func=cmd_score_dump)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; this tool reports 1
        return 1 if exc.code else 0
    if not getattr(args, "func", None):
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename} (check the path)", file=sys.stderr)
        return 2
    except (DataError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
