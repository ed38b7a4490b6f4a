import numpy as np

from dialseg import (
    Dialogue,
    LexicalHashProvider,
    Segmenter,
    SyntheticSpec,
    ZeroCoherence,
    evaluate_corpus,
    generate_synthetic,
)


class TestSegmenter:
    def test_single_utterance_dialogue(self):
        seg = Segmenter(provider=LexicalHashProvider(32, 0))
        result = seg.segment_dialogue(Dialogue("d", ("only one turn here",)))
        assert result.boundaries == () and result.n == 1

    def test_no_topic_uses_coherence_only(self):
        seg = Segmenter(provider=LexicalHashProvider(32, 0), use_topic=False)
        d = Dialogue("d", ("alpha beta", "beta gamma", "delta epsilon"))
        series = seg.relevance_for(d)
        assert np.all(series.topic_sim == 0.0)
        assert np.array_equal(series.scores, series.coherence)

    def test_parallel_matches_serial(self):
        corpus = generate_synthetic(SyntheticSpec(dialogues=12, seed=5))
        seg = Segmenter(provider=LexicalHashProvider(64, 0))
        serial = seg.segment_corpus(corpus, jobs=1)
        parallel = seg.segment_corpus(corpus, jobs=4)
        assert serial == parallel

    def test_synthetic_recovery_smoke(self):
        # disjoint vocabularies are recoverable nearly perfectly without training
        corpus = generate_synthetic(SyntheticSpec(dialogues=20, seed=2))
        seg = Segmenter(provider=LexicalHashProvider(256, 0), coherence=ZeroCoherence())
        refs = {d.id: d.gold_boundaries for d in corpus}
        metrics = evaluate_corpus(refs, seg.segment_corpus(corpus))
        assert metrics.pk < 0.05
