from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from argcluster.clustering import ClusterAssignment, save_assignment
from argcluster.corpus import save_dataset
from argcluster.embedding import tfidf_matrix
from argcluster.retrieval import retrieve_all, save_run
from argcluster.server import create_app

from test_review import fixture_assignment, fixture_dataset


@pytest.fixture()
def store_root(tmp_path):
    """A store directory preloaded with dataset, assignment and run artifacts."""
    root = tmp_path / "store"
    root.mkdir()
    ds = fixture_dataset()
    save_dataset(ds, root / "dataset.jsonl")
    save_assignment(fixture_assignment(), root / "assignment.json")
    matrix = tfidf_matrix(ds)
    save_run(retrieve_all(ds, matrix), root / "run.jsonl")
    return root


@pytest.fixture()
def client(store_root):
    return TestClient(create_app(store_root))


def make_project(client, project_id="p1", **extra):
    body = {
        "dataset_path": "dataset.jsonl",
        "assignment_path": "assignment.json",
        "project_id": project_id,
        **extra,
    }
    response = client.post("/projects", json=body)
    assert response.status_code == 200, response.text
    return response.json()


def lock_token(client, project_id="p1"):
    response = client.post(f"/projects/{project_id}/lock")
    assert response.status_code == 200
    return response.json()["token"]


def post_edit(client, kind, payload, token, project_id="p1", **body_extra):
    return client.post(
        f"/projects/{project_id}/edits",
        json={"kind": kind, "payload": payload, **body_extra},
        headers={"X-Lock-Token": token},
    )


class TestProjectLifecycle:
    def test_empty_listing(self, client):
        response = client.get("/projects")
        assert response.status_code == 200
        assert response.json() == {"projects": []}

    def test_create_and_list(self, client):
        created = make_project(client)
        assert created == {"project_id": "p1", "version": 0}
        rows = client.get("/projects").json()["projects"]
        assert len(rows) == 1
        assert rows[0]["project_id"] == "p1"
        assert rows[0]["locked"] is False

    def test_missing_field_rejected(self, client):
        response = client.post("/projects", json={"dataset_path": "dataset.jsonl"})
        assert response.status_code == 400
        assert "assignment_path" in response.json()["detail"]

    def test_duplicate_id_conflicts(self, client):
        make_project(client)
        response = client.post(
            "/projects",
            json={
                "dataset_path": "dataset.jsonl",
                "assignment_path": "assignment.json",
                "project_id": "p1",
            },
        )
        assert response.status_code == 409

    def test_bad_path_rejected(self, client):
        response = client.post(
            "/projects",
            json={"dataset_path": "missing.jsonl", "assignment_path": "assignment.json"},
        )
        assert response.status_code == 400

    def test_unknown_project_404(self, client):
        assert client.get("/projects/nope/state").status_code == 404
        assert client.get("/projects/nope/metrics").status_code == 404


class TestState:
    def test_initial_state_shape(self, client):
        make_project(client, reference_essay_ids=["e1"])
        doc = client.get("/projects/p1/state").json()
        assert doc["project_id"] == "p1"
        assert doc["version"] == 0
        assert doc["backend_id"] == "toy"
        assert doc["next_cluster_id"] == 3
        assert doc["reference_essay_ids"] == ["e1"]
        assert [c["cluster_id"] for c in doc["clusters"]] == [0, 1, 2]
        first = doc["clusters"][0]
        assert [s["sentence_id"] for s in first["sentences"]] == ["s1", "s3"]
        assert first["desirability"] == "neutral"
        assert set(first["sentences"][0]) == {"sentence_id", "essay_id", "text", "labels"}

    def test_state_reflects_edits(self, client):
        make_project(client)
        token = lock_token(client)
        post_edit(client, "create_cluster", {"name": "fresh"}, token)
        post_edit(client, "move_sentence", {"sentence_id": "s1", "to_cluster": 3}, token)
        doc = client.get("/projects/p1/state").json()
        assert doc["version"] == 2
        assert doc["next_cluster_id"] == 4
        created = next(c for c in doc["clusters"] if c["cluster_id"] == 3)
        assert created["name"] == "fresh"
        assert [s["sentence_id"] for s in created["sentences"]] == ["s1"]


class TestEdits:
    def test_edit_without_lock_conflicts(self, client):
        make_project(client)
        response = client.post(
            "/projects/p1/edits", json={"kind": "create_cluster", "payload": {}}
        )
        assert response.status_code == 409

    def test_edit_with_wrong_token_conflicts(self, client):
        make_project(client)
        lock_token(client)
        response = post_edit(client, "create_cluster", {}, "wrong-token")
        assert response.status_code == 409

    def test_edit_happy_path(self, client):
        make_project(client)
        token = lock_token(client)
        response = post_edit(client, "create_cluster", {}, token)
        assert response.status_code == 200
        assert response.json() == {"edit_id": 1, "kind": "create_cluster", "version": 1}

    def test_stale_version_conflicts(self, client):
        make_project(client)
        token = lock_token(client)
        post_edit(client, "create_cluster", {}, token)
        response = post_edit(client, "create_cluster", {}, token, expected_version=0)
        assert response.status_code == 409
        assert "stale" in response.json()["detail"]

    def test_matching_version_accepted(self, client):
        make_project(client)
        token = lock_token(client)
        post_edit(client, "create_cluster", {}, token)
        response = post_edit(client, "create_cluster", {}, token, expected_version=1)
        assert response.status_code == 200
        assert response.json()["version"] == 2

    def test_unknown_kind_rejected(self, client):
        make_project(client)
        token = lock_token(client)
        assert post_edit(client, "explode", {}, token).status_code == 400

    def test_unknown_sentence_rejected(self, client):
        make_project(client)
        token = lock_token(client)
        response = post_edit(
            client, "move_sentence", {"sentence_id": "s99", "to_cluster": 0}, token
        )
        assert response.status_code == 400

    def test_non_object_payload_rejected(self, client):
        make_project(client)
        token = lock_token(client)
        response = client.post(
            "/projects/p1/edits",
            json={"kind": "create_cluster", "payload": [1, 2]},
            headers={"X-Lock-Token": token},
        )
        assert response.status_code == 400

    def test_edits_survive_server_restart(self, client, store_root):
        make_project(client)
        token = lock_token(client)
        post_edit(client, "create_cluster", {"name": "durable"}, token)
        fresh = TestClient(create_app(store_root))
        doc = fresh.get("/projects/p1/state").json()
        assert doc["version"] == 1
        assert any(c["name"] == "durable" for c in doc["clusters"])


class TestOverlap:
    def test_overlap_shape(self, client):
        make_project(client, reference_essay_ids=["e1", "e3"])
        doc = client.get("/projects/p1/overlap/e2").json()
        assert doc["essay_id"] == "e2"
        assert doc["reference_clusters"] == 3
        assert doc["shared_clusters"] == 2
        assert doc["coverage"] == pytest.approx(2 / 3)

    def test_unknown_essay_404(self, client):
        make_project(client, reference_essay_ids=["e1"])
        assert client.get("/projects/p1/overlap/e9").status_code == 404

    def test_without_references_400(self, client):
        make_project(client)
        assert client.get("/projects/p1/overlap/e1").status_code == 400


class TestMetrics:
    def test_metrics_shape(self, client):
        make_project(client)
        doc = client.get("/projects/p1/metrics").json()
        assert doc["num_clusters"] == 3
        assert doc["num_sentences"] == 6
        assert doc["num_edits"] == 0
        assert doc["version"] == 0
        assert "cluster_accuracy" in doc


class TestSimilar:
    def test_slice_matches_saved_run(self, client, store_root):
        make_project(client, run_path="run.jsonl")
        doc = client.get("/projects/p1/similar/s1").json()
        saved = [
            json.loads(line)
            for line in (store_root / "run.jsonl").read_text().splitlines()
        ]
        on_disk = next(rec for rec in saved if rec.get("query_id") == "s1")
        assert doc["query_id"] == "s1"
        assert doc["num_candidates"] == on_disk["num_candidates"] == 5
        assert doc["entries"] == on_disk["entries"][:10]

    def test_limit_truncates(self, client):
        make_project(client, run_path="run.jsonl")
        doc = client.get("/projects/p1/similar/s1", params={"limit": 2}).json()
        assert len(doc["entries"]) == 2

    def test_unknown_sentence_404(self, client):
        make_project(client, run_path="run.jsonl")
        assert client.get("/projects/p1/similar/s99").status_code == 404

    def test_skipped_query_404(self, client):
        # s4 is unlabeled, so the retrieval run holds no ranked list for it
        make_project(client, run_path="run.jsonl")
        response = client.get("/projects/p1/similar/s4")
        assert response.status_code == 404
        assert "ranked list" in response.json()["detail"]

    def test_project_without_run_400(self, client):
        make_project(client)
        assert client.get("/projects/p1/similar/s1").status_code == 400


class TestLockEndpoints:
    def test_acquire_release_cycle(self, client):
        make_project(client)
        token = lock_token(client)
        assert client.get("/projects").json()["projects"][0]["locked"] is True
        assert client.post("/projects/p1/lock").status_code == 409
        released = client.delete(
            "/projects/p1/lock", headers={"X-Lock-Token": token}
        )
        assert released.status_code == 200
        assert client.get("/projects").json()["projects"][0]["locked"] is False
        assert client.post("/projects/p1/lock").status_code == 200

    def test_release_without_header_400(self, client):
        make_project(client)
        lock_token(client)
        assert client.delete("/projects/p1/lock").status_code == 400

    def test_release_wrong_token_409(self, client):
        make_project(client)
        lock_token(client)
        response = client.delete(
            "/projects/p1/lock", headers={"X-Lock-Token": "bogus"}
        )
        assert response.status_code == 409
