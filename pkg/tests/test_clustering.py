from __future__ import annotations

import random

import numpy as np
import pytest

from argcluster.clustering import (
    ClusterAssignment,
    MergeStep,
    load_assignment,
    save_assignment,
    save_assignment_csv,
    true_cluster_count,
    ward_cluster,
)
from argcluster.corpus import ValidationError, with_singleton_labels
from argcluster.embedding import EmbeddingMatrix, SentenceVector

from conftest import dataset, sent
from test_retrieval import dense_matrix

import oracle_pipeline


class TestTrueClusterCount:
    def test_labels_plus_unlabeled(self):
        ds = dataset(
            sent("s1", labels=("a",)),
            sent("s2", labels=("b",)),
            sent("s3", labels=("c", "a")),
            sent("s4"),
            sent("s5"),
        )
        assert true_cluster_count(ds) == 5  # 3 labels + 2 singletons

    def test_fully_labeled(self):
        ds = dataset(
            sent("s1", labels=("x",)),
            sent("s2", labels=("y",)),
            sent("s3", labels=("x",)),
        )
        assert true_cluster_count(ds) == 2

    def test_override_wins(self):
        ds = dataset(sent("s1", labels=("a",)), sent("s2"))
        assert true_cluster_count(ds, override=1) == 1

    def test_override_out_of_range(self):
        ds = dataset(sent("s1"), sent("s2"))
        with pytest.raises(ValidationError):
            true_cluster_count(ds, override=3)

    def test_injected_singletons_do_not_count_as_labels(self):
        ds = with_singleton_labels(dataset(sent("s1", labels=("a",)), sent("s2")))
        assert true_cluster_count(ds) == 2

    def test_overflow_names_the_override(self):
        ds = dataset(
            sent("s1", labels=("a", "b")),
            sent("s2", labels=("c",)),
        )
        with pytest.raises(ValidationError, match="override"):
            true_cluster_count(ds)


def planar(backend="geo", normalize=False, **points):
    return dense_matrix(backend, points), normalize


class TestWardCluster:
    def test_k_equals_n_no_merges(self):
        matrix = dense_matrix("geo", {"a": [1, 0], "b": [0, 1], "c": [1, 1]})
        result = ward_cluster(matrix, k=3)
        assert result.merge_history == ()
        assert sorted(result.assignment.values()) == [0, 1, 2]

    def test_k_one_single_cluster(self):
        matrix = dense_matrix("geo", {"a": [1, 0], "b": [0, 1], "c": [1, 1]})
        result = ward_cluster(matrix, k=1)
        assert set(result.assignment.values()) == {0}
        assert len(result.merge_history) == 2

    def test_two_planar_pairs(self):
        matrix = dense_matrix(
            "geo", {"p1": [0.0, 0.0], "p2": [0.0, 1.0], "p3": [10.0, 0.0], "p4": [10.0, 1.0]}
        )
        result = ward_cluster(matrix, k=2, normalize=False)
        groups = {frozenset(ids) for ids in result.members().values()}
        assert groups == {frozenset({"p1", "p2"}), frozenset({"p3", "p4"})}

    def test_first_pair_merge_cost(self):
        # identical points merge at zero cost; distance-1 pair costs 1/2 * 1
        matrix = dense_matrix("geo", {"a": [0.0, 0.0], "b": [0.0, 1.0]})
        result = ward_cluster(matrix, k=1, normalize=False)
        assert result.merge_history[0].cost == pytest.approx(0.5)

    def test_merge_costs_non_decreasing(self):
        rng = random.Random(11)
        points = {f"s{i:02d}": [rng.gauss(0, 1) for _ in range(3)] for i in range(20)}
        matrix = dense_matrix("geo", points)
        result = ward_cluster(matrix, k=1, normalize=False)
        costs = [step.cost for step in result.merge_history]
        assert all(later >= earlier - 1e-12 for earlier, later in zip(costs, costs[1:]))

    def test_row_order_invariance(self):
        rng = random.Random(5)
        points = {f"s{i:02d}": [rng.gauss(0, 1) for _ in range(4)] for i in range(12)}
        matrix = dense_matrix("geo", points)
        shuffled_ids = list(points)
        rng.shuffle(shuffled_ids)
        shuffled = dense_matrix("geo", {sid: points[sid] for sid in shuffled_ids})
        assert ward_cluster(matrix, k=4).assignment == ward_cluster(shuffled, k=4).assignment

    def test_blob_recovery(self):
        rng = random.Random(99)
        centers = [(0, 0), (50, 0), (0, 50), (50, 50)]
        points, truth = {}, {}
        for b, (cx, cy) in enumerate(centers):
            for j in range(10):
                sid = f"b{b}p{j}"
                points[sid] = [cx + rng.gauss(0, 0.5), cy + rng.gauss(0, 0.5)]
                truth[sid] = b
        result = ward_cluster(dense_matrix("geo", points), k=4, normalize=False)
        groups = {frozenset(ids) for ids in result.members().values()}
        expected = {
            frozenset(sid for sid, b in truth.items() if b == blob) for blob in range(4)
        }
        assert groups == expected

    def test_normalized_directions_recovered(self):
        # same direction at different magnitudes collapses under normalization
        matrix = dense_matrix(
            "geo", {"a": [1.0, 0.0], "b": [7.0, 0.0], "c": [0.0, 2.0], "d": [0.0, 0.1]}
        )
        result = ward_cluster(matrix, k=2)  # normalize=True default
        groups = {frozenset(ids) for ids in result.members().values()}
        assert groups == {frozenset({"a", "b"}), frozenset({"c", "d"})}

    def test_empty_vectors_counted(self):
        matrix = dense_matrix(
            "geo", {"a": [0.0, 0.0], "b": [1.0, 0.0], "c": [0.0, 0.0]}
        )
        result = ward_cluster(matrix, k=2)
        assert result.num_empty_vectors == 2

    def test_cluster_indices_follow_min_sentence_id(self):
        matrix = dense_matrix(
            "geo", {"z9": [0.0, 1.0], "a1": [1.0, 0.0], "m5": [1.0, 0.01]}
        )
        result = ward_cluster(matrix, k=2)
        # cluster containing a1 has the smaller min id -> index 0
        assert result.assignment["a1"] == 0
        assert result.assignment["z9"] == 1

    def test_empty_matrix_rejected(self):
        matrix = EmbeddingMatrix(backend_id="geo", dim=2, rows=())
        with pytest.raises(ValidationError):
            ward_cluster(matrix, k=1)

    def test_k_out_of_range(self):
        matrix = dense_matrix("geo", {"a": [1.0, 0.0], "b": [0.0, 1.0]})
        with pytest.raises(ValidationError):
            ward_cluster(matrix, k=0)
        with pytest.raises(ValidationError):
            ward_cluster(matrix, k=3)


class TestOracleAgreement:
    def test_random_geometries_match_centroid_recomputation(self):
        rng = random.Random(42)
        for trial in range(10):
            n = rng.randint(4, 16)
            dim = rng.randint(2, 4)
            points = {
                f"s{i:02d}": [rng.gauss(0, 1) for _ in range(dim)] for i in range(n)
            }
            k = rng.randint(1, n)
            result = ward_cluster(dense_matrix("geo", points), k=k, normalize=False)
            sparse = {
                sid: {str(axis): value for axis, value in enumerate(vec) if value}
                for sid, vec in points.items()
            }
            oracle_assign, oracle_history = oracle_pipeline.ward_from_scratch(sparse, k)
            assert result.assignment == oracle_assign
            assert len(result.merge_history) == len(oracle_history)
            for step, (a, b, cost) in zip(result.merge_history, oracle_history):
                assert (step.cluster_a, step.cluster_b) == (a, b)
                assert step.cost == pytest.approx(cost, abs=1e-8)


class TestPersistence:
    def sample_assignment(self):
        return ClusterAssignment(
            backend_id="geo",
            k=2,
            assignment={"a": 0, "b": 1, "c": 0},
            merge_history=(MergeStep("a", "c", 0.125),),
            num_empty_vectors=1,
        )

    def test_json_round_trip(self, tmp_path):
        original = self.sample_assignment()
        path = tmp_path / "assignment.json"
        save_assignment(original, path)
        assert load_assignment(path) == original

    def test_csv_lists_every_sentence(self, tmp_path):
        path = tmp_path / "assignment.csv"
        save_assignment_csv(self.sample_assignment(), path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "sentence_id,cluster"
        assert sorted(lines[1:]) == ["a,0", "b,1", "c,0"]

    def test_members_sorted(self):
        members = self.sample_assignment().members()
        assert members == {0: ["a", "c"], 1: ["b"]}
