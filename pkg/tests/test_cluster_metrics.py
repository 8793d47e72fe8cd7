from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from argcluster.cluster_metrics import (
    ClusterReport,
    ContingencyTable,
    adjusted_mutual_info,
    adjusted_rand,
    cluster_accuracy,
    expected_mutual_information,
    load_report,
    majority_label,
    render_cluster_table,
    sample_labels,
    sampled_cluster_eval,
    save_report,
)
from argcluster.corpus import with_singleton_labels

from conftest import dataset, sent

import oracle_cluster_metrics


class TestMajorityLabel:
    def test_plain_majority(self):
        members = [sent("s1", labels=("a",)), sent("s2", labels=("a",)), sent("s3", labels=("b",))]
        assert majority_label(members) == "a"

    def test_single_member(self):
        assert majority_label([sent("s1", labels=("x",))]) == "x"

    def test_tie_breaks_to_smallest_name(self):
        members = [sent("s1", labels=("b",)), sent("s2", labels=("a",))]
        assert majority_label(members) == "a"

    def test_multi_label_members_count_each_label(self):
        members = [sent("s1", labels=("a", "b")), sent("s2", labels=("b",))]
        assert majority_label(members) == "b"

    def test_empty_cluster_rejected(self):
        with pytest.raises(ValueError):
            majority_label([])

    def test_unlabeled_member_rejected(self):
        with pytest.raises(ValueError, match="s9"):
            majority_label([sent("s9")])


class TestClusterAccuracy:
    def test_perfect_single_label(self):
        ds = dataset(
            sent("s1", labels=("a",)),
            sent("s2", labels=("a",)),
            sent("s3", labels=("b",)),
        )
        assignment = {"s1": 0, "s2": 0, "s3": 1}
        assert cluster_accuracy(assignment, ds) == 100.0

    def test_one_wrong_member(self):
        ds = dataset(
            sent("s1", labels=("a",)),
            sent("s2", labels=("a",)),
            sent("s3", labels=("b",)),
        )
        assignment = {"s1": 0, "s2": 0, "s3": 0}
        assert cluster_accuracy(assignment, ds) == pytest.approx(100 * 2 / 3)

    def test_multi_label_counts_any_match(self):
        ds = dataset(
            sent("s1", labels=("a",)),
            sent("s2", labels=("a", "b")),
        )
        assert cluster_accuracy({"s1": 0, "s2": 0}, ds) == 100.0

    def test_missing_sentence_named(self):
        ds = dataset(sent("s1", labels=("a",)), sent("s2", labels=("a",)))
        with pytest.raises(ValueError, match="s2"):
            cluster_accuracy({"s1": 0}, ds)


class TestAdjustedRand:
    def test_identical_partitions(self):
        assert adjusted_rand([0, 0, 1, 1], ["x", "x", "y", "y"]) == 1.0

    def test_identical_after_relabeling(self):
        assert adjusted_rand([5, 5, 2, 2], [1, 1, 0, 0]) == 1.0

    def test_known_negative_case(self):
        # maximally disagreeing pair structure on four items
        assert adjusted_rand([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)

    def test_all_singletons_vs_all_one(self):
        assert adjusted_rand([0, 1, 2, 3], [9, 9, 9, 9]) == 0.0

    def test_degenerate_equal_trivial_partitions(self):
        # both put everything in one cluster: denominator 0 -> defined as 1.0
        assert adjusted_rand([7, 7, 7], [1, 1, 1]) == 1.0

    def test_too_few_items_rejected(self):
        with pytest.raises(ValueError):
            adjusted_rand([0], [0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            adjusted_rand([0, 1], [0, 1, 2])


class TestAdjustedMutualInfo:
    def test_identical_partitions_exactly_one(self):
        assert adjusted_mutual_info([0, 0, 1, 1, 2], ["a", "a", "b", "b", "c"]) == 1.0

    def test_identical_trivial_partition_exactly_one(self):
        assert adjusted_mutual_info([0, 0, 0], [5, 5, 5]) == 1.0

    def test_trivial_versus_singletons_zero(self):
        assert adjusted_mutual_info([0, 0, 0, 0], [0, 1, 2, 3]) == 0.0

    def test_expected_mi_matches_brute_force(self):
        rng = random.Random(17)
        for _ in range(20):
            n = rng.randint(2, 12)
            pred = [rng.randrange(3) for _ in range(n)]
            truth = [rng.randrange(3) for _ in range(n)]
            table = ContingencyTable.from_partitions(pred, truth)
            ours = expected_mutual_information(table.row_marginals, table.col_marginals, n)
            _, row, col, total = oracle_cluster_metrics.contingency(pred, truth)
            theirs = oracle_cluster_metrics.expected_mutual_information(row, col, total)
            assert ours == pytest.approx(theirs, abs=1e-9)

    def test_random_pairs_match_oracle(self):
        rng = random.Random(23)
        for _ in range(40):
            n = rng.randint(2, 10)
            pred = [rng.randrange(4) for _ in range(n)]
            truth = [rng.randrange(4) for _ in range(n)]
            assert adjusted_mutual_info(pred, truth) == pytest.approx(
                oracle_cluster_metrics.adjusted_mutual_info_direct(pred, truth), abs=1e-9
            )


class TestSymmetryProperties:
    partitions = st.integers(min_value=2, max_value=8).flatmap(
        lambda n: st.tuples(
            st.lists(st.integers(0, 3), min_size=n, max_size=n),
            st.lists(st.integers(0, 3), min_size=n, max_size=n),
        )
    )

    @given(partitions)
    @settings(max_examples=60, deadline=None)
    def test_both_scores_symmetric(self, pair):
        pred, truth = pair
        assert adjusted_rand(pred, truth) == pytest.approx(adjusted_rand(truth, pred), abs=1e-12)
        assert adjusted_mutual_info(pred, truth) == pytest.approx(
            adjusted_mutual_info(truth, pred), abs=1e-9
        )

    @given(partitions)
    @settings(max_examples=60, deadline=None)
    def test_relabeling_invariance(self, pair):
        pred, truth = pair
        renamed = [f"group-{value}" for value in pred]
        assert adjusted_rand(renamed, truth) == pytest.approx(
            adjusted_rand(pred, truth), abs=1e-12
        )
        assert adjusted_mutual_info(renamed, truth) == pytest.approx(
            adjusted_mutual_info(pred, truth), abs=1e-9
        )

    @given(partitions)
    @settings(max_examples=60, deadline=None)
    def test_scores_bounded_above_by_one(self, pair):
        pred, truth = pair
        assert adjusted_rand(pred, truth) <= 1.0 + 1e-12
        assert adjusted_mutual_info(pred, truth) <= 1.0 + 1e-9


class TestContingencyTable:
    def test_marginals_consistent(self):
        table = ContingencyTable.from_partitions([0, 0, 1, 2], ["a", "b", "b", "b"])
        assert sum(table.row_marginals) == table.n == 4
        assert sum(table.col_marginals) == table.n
        for i, row in enumerate(table.counts):
            assert sum(row) == table.row_marginals[i]
        for j in range(len(table.col_marginals)):
            assert sum(row[j] for row in table.counts) == table.col_marginals[j]

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ContingencyTable.from_partitions([0, 1], [0])


class TestSampleLabels:
    def test_single_label_sentences_consume_no_draw(self):
        # identical seeds give identical draws for the multi-label sentence
        # regardless of how many single-label sentences precede it
        multi_only = dataset(sent("s1", labels=("a", "b", "c")))
        padded = dataset(
            sent("s0", labels=("z",)),
            sent("s1", labels=("a", "b", "c")),
        )
        for seed in range(20):
            lone = sample_labels(multi_only, seed)[0]
            after_pad = sample_labels(padded, seed)[1]
            assert lone == after_pad

    def test_unlabeled_sentence_rejected(self):
        with pytest.raises(ValueError, match="s2"):
            sample_labels(dataset(sent("s1", labels=("a",)), sent("s2")), 0)

    def test_draws_cover_all_labels(self):
        ds = dataset(sent("s1", labels=("a", "b")))
        seen = {sample_labels(ds, seed)[0] for seed in range(50)}
        assert seen == {"a", "b"}


class TestSampledClusterEval:
    def fixture_dataset(self):
        return with_singleton_labels(
            dataset(
                sent("s1", labels=("a",)),
                sent("s2", labels=("a", "b")),
                sent("s3", labels=("b",)),
                sent("s4", labels=("c",)),
                sent("s5"),
            )
        )

    def test_no_multilabel_means_zero_std(self):
        ds = with_singleton_labels(
            dataset(
                sent("s1", labels=("a",)),
                sent("s2", labels=("a",)),
                sent("s3", labels=("b",)),
                sent("s4"),
            )
        )
        assignment = {"s1": 0, "s2": 0, "s3": 1, "s4": 2}
        report = sampled_cluster_eval(assignment, ds, repetitions=10, seed=3)
        assert report.std_adjusted_rand == 0.0
        assert report.std_adjusted_mutual_info == 0.0
        single = sampled_cluster_eval(assignment, ds, repetitions=1, seed=3)
        assert report.avg_adjusted_rand == single.avg_adjusted_rand
        assert report.avg_adjusted_mutual_info == single.avg_adjusted_mutual_info

    def test_fixed_seed_bit_identical(self):
        ds = self.fixture_dataset()
        assignment = {"s1": 0, "s2": 0, "s3": 1, "s4": 2, "s5": 3}
        first = sampled_cluster_eval(assignment, ds, repetitions=25, seed=7)
        second = sampled_cluster_eval(assignment, ds, repetitions=25, seed=7)
        assert first == second

    def test_serial_equals_parallel(self):
        ds = self.fixture_dataset()
        assignment = {"s1": 0, "s2": 1, "s3": 1, "s4": 2, "s5": 3}
        serial = sampled_cluster_eval(assignment, ds, repetitions=20, seed=5)
        parallel = sampled_cluster_eval(
            assignment, ds, repetitions=20, seed=5, max_workers=4
        )
        assert serial == parallel

    def test_perfect_assignment_scores_one(self):
        ds = with_singleton_labels(
            dataset(
                sent("s1", labels=("a",)),
                sent("s2", labels=("a",)),
                sent("s3", labels=("b",)),
            )
        )
        report = sampled_cluster_eval({"s1": 0, "s2": 0, "s3": 1}, ds, repetitions=5)
        assert report.avg_adjusted_rand == 1.0
        assert report.avg_adjusted_mutual_info == 1.0
        assert report.cluster_accuracy == 100.0

    def test_repetitions_must_be_positive(self):
        ds = self.fixture_dataset()
        with pytest.raises(ValueError):
            sampled_cluster_eval({"s1": 0, "s2": 0, "s3": 0, "s4": 0, "s5": 0}, ds, repetitions=0)

    def test_backend_id_carried(self):
        ds = self.fixture_dataset()
        assignment = {"s1": 0, "s2": 0, "s3": 1, "s4": 1, "s5": 2}
        report = sampled_cluster_eval(assignment, ds, repetitions=2, backend_id="toy")
        assert report.backend_id == "toy"
        assert report.repetitions == 2


class TestRenderAndPersist:
    def sample_report(self):
        return ClusterReport(
            backend_id="toy",
            avg_adjusted_rand=0.1234,
            std_adjusted_rand=0.0456,
            avg_adjusted_mutual_info=0.2345,
            std_adjusted_mutual_info=0.0567,
            cluster_accuracy=61.5,
            repetitions=50,
            seed=7,
        )

    def test_table_layout(self):
        text = render_cluster_table([self.sample_report()])
        lines = text.splitlines()
        assert lines[0].startswith("Backend")
        assert "0.12" in lines[1] and "0.0456" in lines[1] and "62%" in lines[1]
        assert text.endswith("\n")

    def test_save_load_round_trip(self, tmp_path):
        path = tmp_path / "report.json"
        save_report(self.sample_report(), path)
        assert load_report(path) == self.sample_report()
