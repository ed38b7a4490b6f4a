import itertools

import pytest

from dialseg import Dialogue, Segmentation
from dialseg.errors import InvalidArgumentError


class TestSegmentationValidation:
    def test_empty_boundaries_is_single_segment(self):
        seg = Segmentation((), 3)
        assert seg.segment_count == 1

    def test_rejects_out_of_range_boundary(self):
        with pytest.raises(InvalidArgumentError):
            Segmentation((3,), 3)  # max legal is n-1
        with pytest.raises(InvalidArgumentError):
            Segmentation((0,), 3)

    def test_rejects_non_increasing(self):
        with pytest.raises(InvalidArgumentError):
            Segmentation((2, 2), 5)
        with pytest.raises(InvalidArgumentError):
            Segmentation((3, 2), 5)

    def test_rejects_bad_n(self):
        with pytest.raises(InvalidArgumentError):
            Segmentation((), 0)


class TestSegmentOf:
    def test_middle_boundary(self):
        seg = Segmentation((5,), 10)
        assert seg.segment_of(4) == (1, (1, 5))

    def test_no_boundaries(self):
        seg = Segmentation((), 3)
        assert seg.segment_of(2) == (1, (1, 3))

    def test_last_segment(self):
        seg = Segmentation((2, 6), 8)
        assert seg.segment_of(7) == (3, (7, 8))

    def test_out_of_range(self):
        seg = Segmentation((2,), 4)
        with pytest.raises(InvalidArgumentError):
            seg.segment_of(0)
        with pytest.raises(InvalidArgumentError):
            seg.segment_of(5)

    def test_ranges_partition_all_utterances(self):
        # every utterance falls in exactly one returned range, ranges tile [1, n]
        for n in range(1, 9):
            for r in range(n):
                for bounds in itertools.combinations(range(1, n), r):
                    seg = Segmentation(bounds, n)
                    covered = []
                    for u in range(1, n + 1):
                        ordinal, (first, last) = seg.segment_of(u)
                        assert first <= u <= last
                        assert 1 <= ordinal <= seg.segment_count
                        covered.append((ordinal, first, last))
                    ranges = sorted(set(covered))
                    assert ranges[0][1] == 1 and ranges[-1][2] == n
                    for (_, _, last), (_, first, _) in zip(ranges, ranges[1:]):
                        assert first == last + 1


class TestSameSegment:
    def test_examples(self):
        seg = Segmentation((2,), 4)
        assert seg.same_segment(1, 2) is True
        assert seg.same_segment(2, 3) is False
        assert Segmentation((), 4).same_segment(1, 4) is True

    def test_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            Segmentation((2,), 4).same_segment(1, 5)

    def test_reflexive_symmetric_transitive(self):
        seg = Segmentation((2, 5, 6), 9)
        n = seg.n
        for i in range(1, n + 1):
            assert seg.same_segment(i, i)
            for j in range(1, n + 1):
                assert seg.same_segment(i, j) == seg.same_segment(j, i)
        for i, j, k in itertools.combinations(range(1, n + 1), 3):
            if seg.same_segment(i, k):
                assert seg.same_segment(i, j) and seg.same_segment(j, k)

    def test_matches_segment_of(self):
        seg = Segmentation((3, 4, 8), 10)
        for i in range(1, 11):
            for j in range(1, 11):
                same = seg.segment_of(i)[0] == seg.segment_of(j)[0]
                assert seg.same_segment(i, j) == same


class TestDialogue:
    def test_basic(self):
        d = Dialogue("d1", ("hi", "there"))
        assert len(d) == 2
        assert d.interval_count == 1

    def test_rejects_empty_utterance_list(self):
        with pytest.raises(InvalidArgumentError):
            Dialogue("d1", ())

    def test_rejects_blank_utterance(self):
        with pytest.raises(InvalidArgumentError):
            Dialogue("d1", ("ok", "   "))

    def test_rejects_mismatched_gold(self):
        with pytest.raises(InvalidArgumentError):
            Dialogue("d1", ("a", "b"), gold_boundaries=Segmentation((1,), 3))

    def test_single_utterance_legal(self):
        d = Dialogue("d1", ("solo",), gold_boundaries=Segmentation((), 1))
        assert d.interval_count == 0
