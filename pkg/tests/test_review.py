from __future__ import annotations

import random

import pytest

from argcluster.clustering import ClusterAssignment
from argcluster.corpus import ValidationError
from argcluster.review import (
    EditConflictError,
    ProjectStore,
    create_project,
    load_project,
    save_project,
)

from conftest import dataset, sent


def fixture_dataset():
    return dataset(
        sent("s1", essay="e1", labels=("a",)),
        sent("s2", essay="e1", labels=("b",)),
        sent("s3", essay="e2", labels=("a",)),
        sent("s4", essay="e2"),
        sent("s5", essay="e3", labels=("b",)),
        sent("s6", essay="e3", labels=("c",)),
    )


def fixture_assignment():
    return ClusterAssignment(
        backend_id="toy",
        k=3,
        assignment={"s1": 0, "s3": 0, "s2": 1, "s5": 1, "s4": 2, "s6": 2},
        merge_history=(),
    )


def fresh_project(**kwargs):
    return create_project(fixture_dataset(), fixture_assignment(), **kwargs)


class TestCreateProject:
    def test_fresh_project_has_no_edits(self):
        project = fresh_project(project_id="p1")
        assert project.version == 0
        assert project.edit_log == []
        assert project.state.clusters == {
            0: {"s1", "s3"},
            1: {"s2", "s5"},
            2: {"s4", "s6"},
        }
        assert project.state.next_cluster_id == 3

    def test_missing_sentence_named(self):
        partial = ClusterAssignment(
            backend_id="toy", k=1, assignment={"s1": 0}, merge_history=()
        )
        with pytest.raises(ValidationError, match="s2"):
            create_project(fixture_dataset(), partial)

    def test_unknown_assignment_ids_rejected(self):
        bloated = ClusterAssignment(
            backend_id="toy",
            k=1,
            assignment={**fixture_assignment().assignment, "ghost": 0},
            merge_history=(),
        )
        with pytest.raises(ValidationError, match="ghost"):
            create_project(fixture_dataset(), bloated)

    def test_unknown_reference_essay_rejected(self):
        with pytest.raises(ValidationError, match="e9"):
            fresh_project(reference_essay_ids={"e9"})

    def test_generated_project_id(self):
        assert fresh_project().project_id


class TestApplyEdit:
    def test_move_updates_membership_and_log(self):
        project = fresh_project()
        edit = project.apply_edit("move_sentence", {"sentence_id": "s1", "to_cluster": 1})
        assert edit.edit_id == 1
        assert project.version == 1
        assert project.state.clusters[0] == {"s3"}
        assert "s1" in project.state.clusters[1]

    def test_create_cluster_uses_fresh_id(self):
        project = fresh_project()
        project.apply_edit("create_cluster", {"name": "new theme"})
        assert project.state.clusters[3] == set()
        assert project.state.meta[3].name == "new theme"
        assert project.state.next_cluster_id == 4

    def test_deleted_id_never_reused(self):
        project = fresh_project()
        project.apply_edit("create_cluster", {})
        project.apply_edit("delete_cluster", {"cluster_id": 3})
        project.apply_edit("create_cluster", {})
        assert 3 not in project.state.clusters
        assert 4 in project.state.clusters

    def test_delete_nonempty_requires_reassign(self):
        project = fresh_project()
        with pytest.raises(ValidationError, match="not empty"):
            project.apply_edit("delete_cluster", {"cluster_id": 0})

    def test_delete_with_reassign_moves_members(self):
        project = fresh_project()
        project.apply_edit("delete_cluster", {"cluster_id": 0, "reassign_to": 1})
        assert 0 not in project.state.clusters
        assert project.state.clusters[1] == {"s1", "s2", "s3", "s5"}

    def test_reassign_to_self_rejected(self):
        project = fresh_project()
        with pytest.raises(ValidationError):
            project.apply_edit("delete_cluster", {"cluster_id": 0, "reassign_to": 0})

    def test_set_meta_merges_fields(self):
        project = fresh_project()
        project.apply_edit("set_meta", {"cluster_id": 0, "name": "costs", "color": "#aabbcc"})
        project.apply_edit("set_meta", {"cluster_id": 0, "desirability": "desired"})
        meta = project.state.meta[0]
        assert (meta.name, meta.color, meta.desirability) == ("costs", "#aabbcc", "desired")

    def test_bad_desirability_rejected(self):
        project = fresh_project()
        with pytest.raises(ValidationError, match="desirability"):
            project.apply_edit("set_meta", {"cluster_id": 0, "desirability": "great"})

    def test_unknown_kind_rejected(self):
        project = fresh_project()
        with pytest.raises(ValidationError, match="rename_cluster"):
            project.apply_edit("rename_cluster", {})

    def test_unknown_sentence_rejected(self):
        project = fresh_project()
        with pytest.raises(ValidationError, match="s99"):
            project.apply_edit("move_sentence", {"sentence_id": "s99", "to_cluster": 0})

    def test_unknown_target_cluster_rejected(self):
        project = fresh_project()
        with pytest.raises(ValidationError, match="9"):
            project.apply_edit("move_sentence", {"sentence_id": "s1", "to_cluster": 9})
        assert project.version == 0  # failed edit leaves no trace

    def test_stale_expected_version_conflicts(self):
        project = fresh_project()
        project.apply_edit("create_cluster", {})
        with pytest.raises(EditConflictError, match="stale"):
            project.apply_edit("create_cluster", {}, expected_version=0)
        # matching version goes through
        project.apply_edit("create_cluster", {}, expected_version=1)
        assert project.version == 2

    def test_edit_ids_monotone(self):
        project = fresh_project()
        for expected in range(1, 6):
            edit = project.apply_edit("create_cluster", {})
            assert edit.edit_id == expected


class TestReplay:
    def random_edits(self, project, rng, count):
        ids = [s.sentence_id for s in project.dataset]
        for _ in range(count):
            roll = rng.random()
            if roll < 0.5:
                targets = sorted(project.state.clusters)
                project.apply_edit(
                    "move_sentence",
                    {"sentence_id": rng.choice(ids), "to_cluster": rng.choice(targets)},
                )
            elif roll < 0.75:
                project.apply_edit("create_cluster", {"name": f"extra-{rng.random():.3f}"})
            else:
                cid = rng.choice(sorted(project.state.clusters))
                project.apply_edit("set_meta", {"cluster_id": cid, "note": "checked"})

    def test_replay_matches_incremental_state(self):
        project = fresh_project()
        self.random_edits(project, random.Random(13), 10)
        assert project.replay() == project.state

    def test_replay_is_pure(self):
        project = fresh_project()
        self.random_edits(project, random.Random(13), 6)
        first = project.replay()
        second = project.replay()
        assert first == second
        assert first is not second


class TestOverlap:
    def test_reference_covers_itself(self):
        project = fresh_project(reference_essay_ids={"e1"})
        score = project.overlap_with_reference("e1")
        assert score.coverage == 1.0
        assert score.shared_clusters == score.reference_clusters == 2

    def test_partial_coverage(self):
        project = fresh_project(reference_essay_ids={"e1"})
        # isolate s3 so e2 only shares cluster 2... first detach it from 0
        project.apply_edit("create_cluster", {})
        project.apply_edit("move_sentence", {"sentence_id": "s3", "to_cluster": 3})
        # e1 sentences s1, s2 sit in clusters 0 and 1 -> reference clusters {0, 1}
        # e2 sentences: s3 in 3, s4 in 2 -> no shared reference cluster
        assert project.overlap_with_reference("e2").coverage == 0.0
        project.apply_edit("move_sentence", {"sentence_id": "s3", "to_cluster": 0})
        score = project.overlap_with_reference("e2")
        assert score.shared_clusters == 1
        assert score.reference_clusters == 2
        assert score.coverage == pytest.approx(0.5)

    def test_three_reference_clusters_two_touched(self):
        project = fresh_project(reference_essay_ids={"e1", "e3"})
        # reference sentences s1, s2, s5, s6 span clusters {0, 1, 2}
        score = project.overlap_with_reference("e2")
        # e2 has s3 (cluster 0) and s4 (cluster 2) -> shares 2 of 3
        assert score.reference_clusters == 3
        assert score.shared_clusters == 2
        assert score.coverage == pytest.approx(2 / 3)

    def test_no_references_rejected(self):
        with pytest.raises(ValidationError, match="reference"):
            fresh_project().overlap_with_reference("e1")

    def test_unknown_essay_rejected(self):
        project = fresh_project(reference_essay_ids={"e1"})
        with pytest.raises(ValidationError, match="e9"):
            project.overlap_with_reference("e9")

    def test_moves_toward_reference_monotone(self):
        project = fresh_project(reference_essay_ids={"e1"})
        before = project.overlap_with_reference("e3").coverage
        # moving an e3 sentence into a reference cluster never lowers coverage
        project.apply_edit("move_sentence", {"sentence_id": "s6", "to_cluster": 0})
        after = project.overlap_with_reference("e3").coverage
        assert after >= before


class TestMetrics:
    def test_basic_numbers(self):
        project = fresh_project()
        metrics = project.metrics()
        assert metrics["num_clusters"] == 3
        assert metrics["num_sentences"] == 6
        assert metrics["num_edits"] == 0
        assert metrics["version"] == 0
        assert 0.0 <= metrics["cluster_accuracy"] <= 100.0

    def test_edits_reflected(self):
        project = fresh_project()
        project.apply_edit("create_cluster", {})
        metrics = project.metrics()
        assert metrics["num_clusters"] == 4
        assert metrics["num_edits"] == 1
        assert metrics["version"] == 1

    def test_accuracy_omitted_without_labels(self):
        ds = dataset(sent("s1"), sent("s2"))
        assignment = ClusterAssignment(
            backend_id="toy", k=1, assignment={"s1": 0, "s2": 0}, merge_history=()
        )
        metrics = create_project(ds, assignment).metrics()
        assert "cluster_accuracy" not in metrics


class TestPersistence:
    def test_save_load_round_trip(self, tmp_path):
        ds = fixture_dataset()
        project = fresh_project(project_id="p-round")
        project.apply_edit("create_cluster", {"name": "fresh"})
        project.apply_edit("move_sentence", {"sentence_id": "s1", "to_cluster": 3})
        project.apply_edit("set_meta", {"cluster_id": 3, "desirability": "desired"})
        path = tmp_path / "project.json"
        save_project(project, path)
        loaded = load_project(path, dataset=ds)
        assert loaded.project_id == "p-round"
        assert loaded.version == project.version
        assert loaded.state == project.state
        assert [e.kind for e in loaded.edit_log] == [e.kind for e in project.edit_log]

    def test_loaded_project_keeps_accepting_edits(self, tmp_path):
        project = fresh_project()
        project.apply_edit("create_cluster", {})
        path = tmp_path / "project.json"
        save_project(project, path)
        loaded = load_project(path, dataset=fixture_dataset())
        edit = loaded.apply_edit("move_sentence", {"sentence_id": "s2", "to_cluster": 3})
        assert edit.edit_id == 2


class TestProjectStore:
    def make_store(self, tmp_path):
        store = ProjectStore(tmp_path / "store")
        project = fresh_project(project_id="p1")
        store.save(project)
        return store

    def test_save_list_load(self, tmp_path):
        store = self.make_store(tmp_path)
        assert store.list_projects() == ["p1"]
        assert store.exists("p1")
        assert not store.exists("p2")
        loaded = store.load("p1", dataset=fixture_dataset())
        assert loaded.project_id == "p1"

    def test_lock_lifecycle(self, tmp_path):
        store = self.make_store(tmp_path)
        token = store.acquire_lock("p1")
        assert store.lock_holder_exists("p1")
        store.check_lock("p1", token)  # holder passes
        with pytest.raises(EditConflictError):
            store.acquire_lock("p1")  # second writer refused
        store.release_lock("p1", token)
        assert not store.lock_holder_exists("p1")
        assert store.acquire_lock("p1") != token  # tokens are fresh

    def test_wrong_token_rejected(self, tmp_path):
        store = self.make_store(tmp_path)
        token = store.acquire_lock("p1")
        with pytest.raises(EditConflictError):
            store.check_lock("p1", "not-the-token")
        with pytest.raises(EditConflictError):
            store.check_lock("p1", None)
        with pytest.raises(EditConflictError):
            store.release_lock("p1", "not-the-token")
        store.release_lock("p1", token)

    def test_check_without_lock_rejected(self, tmp_path):
        store = self.make_store(tmp_path)
        with pytest.raises(EditConflictError, match="no editing lock"):
            store.check_lock("p1", "anything")

    def test_listing_skips_foreign_json_files(self, tmp_path):
        store = self.make_store(tmp_path)
        (store.root / "assignment.json").write_text('{"k": 2}')
        (store.root / "broken.json").write_text("{not json")
        assert store.list_projects() == ["p1"]
