"""HTTP API over the review project store.

JSON endpoints for the cluster review board: list/create projects, read the
replayed state, append edits under a lock token, and serve overlap scores,
refreshable metrics and per-sentence similarity slices. Error mapping:
400 validation, 404 unknown id, 409 edit conflict or lock held elsewhere.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, Header, HTTPException, Query

from .corpus import ValidationError
from .clustering import load_assignment
from .retrieval import RankedList, RetrievalRun, load_run
from .review import (
    EditConflictError,
    ProjectStore,
    ReviewProject,
    create_project,
    load_project,
)

DEFAULT_SIMILAR_LIMIT = 10


class ServerContext:
    """Shared state behind the endpoints: the on-disk store plus in-memory
    caches. Mutations serialize through one lock per project."""

    def __init__(self, store_root: str | Path):
        self.store = ProjectStore(store_root)
        self.projects: dict[str, ReviewProject] = {}
        self.runs: dict[str, RetrievalRun] = {}
        self.locks: defaultdict[str, threading.Lock] = defaultdict(threading.Lock)

    def resolve(self, path_text: str) -> Path:
        path = Path(path_text)
        return path if path.is_absolute() else self.store.root / path

    def project(self, project_id: str) -> ReviewProject:
        if project_id not in self.projects:
            if not self.store.exists(project_id):
                raise HTTPException(status_code=404, detail=f"unknown project {project_id}")
            self.projects[project_id] = self.store.load(project_id)
        return self.projects[project_id]

    def run_for(self, project: ReviewProject) -> RetrievalRun:
        if not project.run_path:
            raise HTTPException(
                status_code=400,
                detail="project has no retrieval run attached; similar-sentence "
                "lookups need one",
            )
        if project.project_id not in self.runs:
            run_path = self.resolve(project.run_path)
            if not run_path.exists():
                raise HTTPException(
                    status_code=400, detail=f"retrieval run file missing: {project.run_path}"
                )
            self.runs[project.project_id] = load_run(run_path)
        return self.runs[project.project_id]


def state_doc(project: ReviewProject) -> dict[str, Any]:
    state = project.state
    clusters = []
    for cid in sorted(state.clusters):
        meta = state.meta.get(cid)
        sentences = []
        for sentence_id in sorted(state.clusters[cid]):
            sentence = project.dataset.sentence(sentence_id)
            sentences.append(
                {
                    "sentence_id": sentence.sentence_id,
                    "essay_id": sentence.essay_id,
                    "text": sentence.text,
                    "labels": sorted(sentence.labels),
                }
            )
        clusters.append(
            {
                "cluster_id": cid,
                "name": meta.name if meta else "",
                "color": meta.color if meta else "",
                "desirability": meta.desirability if meta else "neutral",
                "note": meta.note if meta else "",
                "sentences": sentences,
            }
        )
    return {
        "project_id": project.project_id,
        "version": project.version,
        "backend_id": project.base.backend_id,
        "num_edits": len(project.edit_log),
        # clients mirroring edits locally need the id the next create will take
        "next_cluster_id": state.next_cluster_id,
        "reference_essay_ids": sorted(project.reference_essay_ids),
        "clusters": clusters,
    }


def ranked_list_doc(ranked: RankedList, limit: int) -> dict[str, Any]:
    entries = ranked.entries[:limit] if limit > 0 else ranked.entries
    return {
        "query_id": ranked.query_id,
        "num_candidates": ranked.num_candidates,
        "entries": [[e.candidate_id, e.similarity, e.relevant] for e in entries],
    }


def create_app(store_root: str | Path) -> FastAPI:
    context = ServerContext(store_root)
    app = FastAPI(title="argcluster review service")
    app.state.context = context

    @app.get("/projects")
    def list_projects() -> dict[str, Any]:
        rows = []
        for project_id in context.store.list_projects():
            with context.locks[project_id]:
                project = context.project(project_id)
                rows.append(
                    {
                        "project_id": project_id,
                        "version": project.version,
                        "num_clusters": len(project.state.clusters),
                        "num_sentences": len(project.dataset),
                        "locked": context.store.lock_holder_exists(project_id),
                    }
                )
        return {"projects": rows}

    @app.post("/projects")
    def post_project(body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        from .corpus import load_dataset

        for key in ("dataset_path", "assignment_path"):
            if not body.get(key):
                raise HTTPException(status_code=400, detail=f"missing field {key}")
        project_id = body.get("project_id")
        if project_id and context.store.exists(project_id):
            raise HTTPException(
                status_code=409, detail=f"project {project_id} already exists"
            )
        try:
            dataset = load_dataset(context.resolve(body["dataset_path"]))
            assignment = load_assignment(context.resolve(body["assignment_path"]))
            project = create_project(
                dataset,
                assignment,
                project_id=project_id,
                dataset_path=body["dataset_path"],
                run_path=body.get("run_path", ""),
                reference_essay_ids=set(body.get("reference_essay_ids", [])),
            )
        except FileNotFoundError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        with context.locks[project.project_id]:
            context.store.save(project)
            context.projects[project.project_id] = project
        return {"project_id": project.project_id, "version": project.version}

    @app.get("/projects/{project_id}/state")
    def get_state(project_id: str) -> dict[str, Any]:
        with context.locks[project_id]:
            return state_doc(context.project(project_id))

    @app.post("/projects/{project_id}/edits")
    def post_edit(
        project_id: str,
        body: dict[str, Any] = Body(...),
        x_lock_token: str | None = Header(default=None),
    ) -> dict[str, Any]:
        kind = body.get("kind")
        payload = body.get("payload", {})
        if not isinstance(payload, dict):
            raise HTTPException(status_code=400, detail="payload must be an object")
        expected_version = body.get("expected_version")
        with context.locks[project_id]:
            project = context.project(project_id)
            try:
                context.store.check_lock(project_id, x_lock_token)
                edit = project.apply_edit(
                    kind or "",
                    payload,
                    actor=str(body.get("actor", "")),
                    expected_version=expected_version,
                )
            except EditConflictError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except ValidationError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            context.store.save(project)
            return {
                "edit_id": edit.edit_id,
                "kind": edit.kind,
                "version": project.version,
            }

    @app.get("/projects/{project_id}/overlap/{essay_id}")
    def get_overlap(project_id: str, essay_id: str) -> dict[str, Any]:
        with context.locks[project_id]:
            project = context.project(project_id)
            if essay_id not in {s.essay_id for s in project.dataset}:
                raise HTTPException(status_code=404, detail=f"unknown essay {essay_id}")
            try:
                score = project.overlap_with_reference(essay_id)
            except ValidationError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            return {
                "essay_id": score.essay_id,
                "shared_clusters": score.shared_clusters,
                "reference_clusters": score.reference_clusters,
                "coverage": score.coverage,
            }

    @app.get("/projects/{project_id}/metrics")
    def get_metrics(project_id: str) -> dict[str, Any]:
        with context.locks[project_id]:
            return context.project(project_id).metrics()

    @app.get("/projects/{project_id}/similar/{sentence_id}")
    def get_similar(
        project_id: str,
        sentence_id: str,
        limit: int = Query(default=DEFAULT_SIMILAR_LIMIT, ge=1),
    ) -> dict[str, Any]:
        with context.locks[project_id]:
            project = context.project(project_id)
            if sentence_id not in project.dataset:
                raise HTTPException(
                    status_code=404, detail=f"unknown sentence {sentence_id}"
                )
            run = context.run_for(project)
            for ranked in run.lists:
                if ranked.query_id == sentence_id:
                    return ranked_list_doc(ranked, limit)
            raise HTTPException(
                status_code=404,
                detail=f"no ranked list for sentence {sentence_id} in this run",
            )

    @app.post("/projects/{project_id}/lock")
    def acquire_lock(project_id: str) -> dict[str, Any]:
        with context.locks[project_id]:
            context.project(project_id)
            try:
                token = context.store.acquire_lock(project_id)
            except EditConflictError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return {"token": token}

    @app.delete("/projects/{project_id}/lock")
    def release_lock(
        project_id: str,
        x_lock_token: str | None = Header(default=None),
    ) -> dict[str, Any]:
        with context.locks[project_id]:
            context.project(project_id)
            if x_lock_token is None:
                raise HTTPException(status_code=400, detail="missing X-Lock-Token header")
            try:
                context.store.release_lock(project_id, x_lock_token)
            except EditConflictError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return {"released": True}

    return app
