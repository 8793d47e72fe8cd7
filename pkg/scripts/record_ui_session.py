"""Record a real review-service session for the frontend contract tests.

Drives the HTTP API in-process (same ASGI app the CLI serves), performs one
edit per board gesture, and captures every request/response pair verbatim.
The frontend test suite replays the same gestures through its client and must
produce byte-equal requests.

Usage: python3 scripts/record_ui_session.py [--out frontend/test/fixtures/session.json]
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

ROOT = Path(__file__).resolve().parent.parent


def build_store(store: Path) -> None:
    from argcluster import cli

    corpus = ROOT / "data" / "synthetic_corpus.jsonl"
    shutil.copy(corpus, store / "dataset.jsonl")
    for argv in (
        ["embed", str(store / "dataset.jsonl"), "--out", str(store)],
        ["retrieve", str(store / "dataset.jsonl"), "--out", str(store)],
        ["cluster", str(store / "dataset.jsonl"), "--out", str(store)],
    ):
        code = cli.main(argv)
        if code != 0:
            raise SystemExit(f"pipeline step failed: {argv}")


class Recorder:
    def __init__(self, client: TestClient):
        self.client = client

    def call(self, method: str, path: str, *, body=None, token=None, params=None):
        headers = {}
        if token is not None:
            headers["X-Lock-Token"] = token
        response = self.client.request(
            method, path, json=body, headers=headers, params=params
        )
        record = {
            "request": {
                "method": method,
                "path": path,
            },
            "response": {"status": response.status_code, "body": response.json()},
        }
        if body is not None:
            record["request"]["body"] = body
        if token is not None:
            record["request"]["headers"] = {"x-lock-token": token}
        if params:
            record["request"]["params"] = params
        return record


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(ROOT / "frontend" / "test" / "fixtures" / "session.json"),
    )
    args = parser.parse_args(argv)

    from argcluster.server import create_app

    with tempfile.TemporaryDirectory() as tmp:
        store = Path(tmp) / "store"
        store.mkdir()
        build_store(store)
        client = TestClient(create_app(store))
        rec = Recorder(client)

        created = rec.call(
            "POST",
            "/projects",
            body={
                "dataset_path": "dataset.jsonl",
                "assignment_path": "assignment.json",
                "run_path": "run.jsonl",
                "project_id": "demo",
                "reference_essay_ids": ["e01"],
            },
        )
        assert created["response"]["status"] == 200, created

        initial_state = rec.call("GET", "/projects/demo/state")
        assert initial_state["response"]["status"] == 200

        lock = rec.call("POST", "/projects/demo/lock")
        token = lock["response"]["body"]["token"]

        # one recorded exchange per board gesture, in a fixed session order
        gestures = [
            (
                {"kind": "move-card", "sentenceId": "s02", "toCluster": 2},
                {"kind": "move_sentence", "payload": {"sentence_id": "s02", "to_cluster": 2}},
            ),
            (
                {"kind": "add-column", "name": "costs"},
                {"kind": "create_cluster", "payload": {"name": "costs"}},
            ),
            (
                {"kind": "move-card", "sentenceId": "s05", "toCluster": 13},
                {"kind": "move_sentence", "payload": {"sentence_id": "s05", "to_cluster": 13}},
            ),
            (
                {"kind": "set-desirability", "clusterId": 2, "desirability": "desired"},
                {"kind": "set_meta", "payload": {"cluster_id": 2, "desirability": "desired"}},
            ),
            (
                {"kind": "rename-column", "clusterId": 0, "name": "commute time"},
                {"kind": "set_meta", "payload": {"cluster_id": 0, "name": "commute time"}},
            ),
            (
                {"kind": "recolor-column", "clusterId": 1, "color": "#88ccee"},
                {"kind": "set_meta", "payload": {"cluster_id": 1, "color": "#88ccee"}},
            ),
            (
                {"kind": "annotate-column", "clusterId": 3, "note": "check wording"},
                {"kind": "set_meta", "payload": {"cluster_id": 3, "note": "check wording"}},
            ),
            (
                {"kind": "move-card", "sentenceId": "s05", "toCluster": 0},
                {"kind": "move_sentence", "payload": {"sentence_id": "s05", "to_cluster": 0}},
            ),
            (
                {"kind": "remove-column", "clusterId": 13},
                {"kind": "delete_cluster", "payload": {"cluster_id": 13}},
            ),
            (
                {"kind": "remove-column", "clusterId": 12, "reassignTo": 11},
                {"kind": "delete_cluster", "payload": {"cluster_id": 12, "reassign_to": 11}},
            ),
        ]

        recorded_gestures = []
        version = 0
        for gesture, edit in gestures:
            body = {**edit, "expected_version": version}
            exchange = rec.call("POST", "/projects/demo/edits", body=body, token=token)
            assert exchange["response"]["status"] == 200, exchange
            version = exchange["response"]["body"]["version"]
            recorded_gestures.append({"gesture": gesture, **exchange})

        conflicts = {
            "stale_edit": rec.call(
                "POST",
                "/projects/demo/edits",
                body={"kind": "create_cluster", "payload": {}, "expected_version": 0},
                token=token,
            ),
            "wrong_token": rec.call(
                "POST",
                "/projects/demo/edits",
                body={"kind": "create_cluster", "payload": {}, "expected_version": version},
                token="not-the-token",
            ),
            "second_lock": rec.call("POST", "/projects/demo/lock"),
        }
        for name, exchange in conflicts.items():
            assert exchange["response"]["status"] == 409, (name, exchange)

        state = rec.call("GET", "/projects/demo/state")
        similar = rec.call(
            "GET", "/projects/demo/similar/s02", params={"limit": 10}
        )
        metrics = rec.call("GET", "/projects/demo/metrics")
        overlap = rec.call("GET", "/projects/demo/overlap/e02")
        listing = rec.call("GET", "/projects")
        for exchange in (state, similar, metrics, overlap, listing):
            assert exchange["response"]["status"] == 200, exchange

        session = {
            "note": "recorded against the live review service; do not edit by hand",
            "token": token,
            "create_project": created,
            "initial_state": initial_state,
            "lock": lock,
            "gestures": recorded_gestures,
            "conflicts": conflicts,
            "state": state,
            "similar": similar,
            "metrics": metrics,
            "overlap": overlap,
            "projects": listing,
        }

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(session, indent=2) + "\n", encoding="utf-8")
    print(f"recorded {len(recorded_gestures)} gestures -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
