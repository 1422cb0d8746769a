"""Tests for the core data types and their plumbing operations."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crowdagg import (
    AnnotationSet,
    DataError,
    FitConfig,
    Hyperparams,
    LabelSetDistribution,
    annotation_stats,
    binarize,
    choose_prior,
)
from crowdagg.errors import CapacityError


def small_set():
    records = [
        (0, 0, [1, 0]),
        (0, 1, [1, 1]),
        (1, 0, [0, 0]),
        (2, 1, [1, 0]),
    ]
    return AnnotationSet.from_records(records, num_instances=3, num_labels=2, num_annotators=3)


class TestAnnotationSet:
    def test_canonical_order_and_counts(self):
        y = small_set()
        assert y.num_records == 4
        assert list(y.annotator_ids) == [0, 0, 1, 2]
        np.testing.assert_array_equal(y.records_per_annotator(), [2, 1, 1])
        np.testing.assert_array_equal(y.annotators_per_instance(), [2, 2, 0])
        np.testing.assert_array_equal(y.positive_votes(), [[1, 0], [2, 1], [0, 0]])

    def test_duplicate_pair_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            AnnotationSet.from_records(
                [(0, 2, [1]), (0, 2, [0])], num_instances=3, num_labels=1, num_annotators=1
            )

    def test_out_of_range_ids_rejected(self):
        with pytest.raises(DataError):
            AnnotationSet.from_records([(5, 0, [1])], 1, 1, 2)
        with pytest.raises(DataError):
            AnnotationSet.from_records([(0, 9, [1])], 1, 1, 2)

    def test_non_binary_labels_rejected(self):
        with pytest.raises(DataError):
            AnnotationSet.from_records([(0, 0, [2])], 1, 1, 1)

    def test_view_round_trip(self):
        # grouping by annotator and by instance are two views of one record set
        y = small_set()
        from_annotator = {
            (l, int(i)): tuple(bits)
            for l, instance_ids, labels in y.by_annotator()
            for i, bits in zip(instance_ids, labels)
        }
        from_instance = {
            (int(l), i): tuple(bits)
            for i, annotator_ids, labels in y.by_instance()
            for l, bits in zip(annotator_ids, labels)
        }
        assert from_annotator == from_instance
        assert len(from_annotator) == y.num_records

    def test_empty_set(self):
        y = AnnotationSet(num_instances=4, num_labels=3, num_annotators=2)
        assert y.num_records == 0
        np.testing.assert_array_equal(y.positive_votes(), np.zeros((4, 3)))


class TestBinarize:
    def test_basic(self):
        np.testing.assert_array_equal(binarize([[0.9, 0.1]], 0.5), [[1, 0]])

    def test_threshold_is_inclusive(self):
        np.testing.assert_array_equal(binarize([[0.5]], 0.5), [[1]])

    def test_all_zero(self):
        np.testing.assert_array_equal(binarize(np.zeros((3, 2))), np.zeros((3, 2)))

    def test_invalid_threshold(self):
        with pytest.raises(ValueError):
            binarize([[0.5]], 0.0)

    @given(
        st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=30),
        st.floats(min_value=0.01, max_value=0.99),
        st.floats(min_value=0.01, max_value=0.99),
    )
    def test_monotone_in_threshold(self, probs, t1, t2):
        lo, hi = sorted((t1, t2))
        row = np.array([probs])
        # raising the threshold can only turn 1s into 0s
        assert np.all(binarize(row, hi) <= binarize(row, lo))


class TestStatsAndPriors:
    def test_average_and_counts(self):
        y = small_set()
        avg, counts = annotation_stats(y)
        assert avg == pytest.approx(4 / 3)
        np.testing.assert_array_equal(counts, [2, 1, 1])

    def test_empty(self):
        y = AnnotationSet(num_instances=4, num_labels=1, num_annotators=2)
        avg, counts = annotation_stats(y)
        assert avg == 0.0
        np.testing.assert_array_equal(counts, [0, 0])

    def test_fully_annotated(self):
        records = [(l, i, [1]) for l in range(3) for i in range(5)]
        y = AnnotationSet.from_records(records, 5, 1, 3)
        avg, _ = annotation_stats(y)
        assert avg == pytest.approx(3.0)

    @pytest.mark.parametrize(
        "avg,expected",
        [(1.5, (12, 1)), (3.0, (6, 1)), (5.0, (4, 1)), (0.0, (12, 1)), (2.0, (6, 1)), (4.0, (4, 1))],
    )
    def test_choose_prior_schedule(self, avg, expected):
        assert choose_prior(avg) == expected


class TestConfigTypes:
    def test_hyperparam_defaults(self):
        hp = Hyperparams(a=4, b=1, num_components=5)
        assert hp.alpha == 0.06 and hp.beta == 0.84
        assert hp.gamma == pytest.approx(0.2)

    def test_hyperparams_from_annotations(self):
        y = small_set()  # avg 4/3 -> strong prior
        hp = Hyperparams.for_annotations(y, num_components=2)
        assert (hp.a, hp.b) == (12, 1)
        hp2 = Hyperparams.for_annotations(y, a=3.0, b=2.0)
        assert (hp2.a, hp2.b) == (3.0, 2.0)

    def test_hyperparam_validation(self):
        with pytest.raises(DataError):
            Hyperparams(a=0, b=1)
        with pytest.raises(DataError):
            Hyperparams(a=1, b=1, num_components=0)

    def test_fit_config_validation(self):
        with pytest.raises(DataError):
            FitConfig(eta=0)
        with pytest.raises(DataError):
            FitConfig(max_iter=0)
        with pytest.raises(DataError):
            FitConfig(restarts=0)


class TestLabelSetDistribution:
    def test_validation(self):
        LabelSetDistribution(1, [0.25, 0.75])
        with pytest.raises(DataError):
            LabelSetDistribution(1, [0.5, 0.6])
        with pytest.raises(DataError):
            LabelSetDistribution(2, [1.0, 0.0])

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            LabelSetDistribution(21, np.zeros(2))
