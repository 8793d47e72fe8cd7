"""Editable review projects for the examiner workflow.

A project wraps an automatic cluster assignment in an event-sourced edit log:
examiners move sentences between clusters, create and delete clusters, and
annotate clusters with a name, a color token, a desirability verdict and a
note. The current state is always the pure replay of the edit log over the
base assignment. Persistence is one JSON document per project; a lock file
with a token enforces a single writer per project.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .corpus import Dataset, ValidationError, with_singleton_labels
from .clustering import ClusterAssignment, MergeStep
from .cluster_metrics import cluster_accuracy

PROJECT_FORMAT = "argcluster-review-project"
PROJECT_VERSION = 1

EDIT_KINDS = ("move_sentence", "create_cluster", "delete_cluster", "set_meta")
DESIRABILITY = ("desired", "neutral", "undesired")


class EditConflictError(Exception):
    """An edit raced a concurrent writer or referenced stale state; retry
    after reloading the project state."""


@dataclass(frozen=True)
class Edit:
    edit_id: int
    kind: str
    payload: dict[str, Any]
    timestamp: float
    actor: str = ""


@dataclass(frozen=True)
class ClusterMeta:
    name: str = ""
    color: str = ""
    desirability: str = "neutral"
    note: str = ""


@dataclass(frozen=True)
class OverlapScore:
    essay_id: str
    shared_clusters: int
    reference_clusters: int
    coverage: float


@dataclass
class ProjectState:
    """Replayed cluster board: cluster id -> member sentence ids."""

    clusters: dict[int, set[str]]
    meta: dict[int, ClusterMeta]
    next_cluster_id: int

    def copy(self) -> ProjectState:
        return ProjectState(
            clusters={cid: set(ids) for cid, ids in self.clusters.items()},
            meta=dict(self.meta),
            next_cluster_id=self.next_cluster_id,
        )

    def cluster_of(self, sentence_id: str) -> int:
        for cid, ids in self.clusters.items():
            if sentence_id in ids:
                return cid
        raise ValidationError(f"sentence {sentence_id} not in any cluster")


def _base_state(assignment: ClusterAssignment) -> ProjectState:
    clusters: dict[int, set[str]] = {index: set() for index in range(assignment.k)}
    for sentence_id, index in assignment.assignment.items():
        clusters[index].add(sentence_id)
    return ProjectState(
        clusters=clusters,
        meta={},
        next_cluster_id=assignment.k,
    )


def apply_edit_to_state(state: ProjectState, edit: Edit) -> ProjectState:
    """Pure transition: returns the state after one edit; the input state is
    never modified."""
    out = state.copy()
    payload = edit.payload
    if edit.kind == "move_sentence":
        sentence_id = payload["sentence_id"]
        target = int(payload["to_cluster"])
        if target not in out.clusters:
            raise ValidationError(f"unknown target cluster {target}")
        source = out.cluster_of(sentence_id)
        out.clusters[source].discard(sentence_id)
        out.clusters[target].add(sentence_id)
    elif edit.kind == "create_cluster":
        cid = out.next_cluster_id
        out.clusters[cid] = set()
        name = payload.get("name", "")
        if name:
            out.meta[cid] = ClusterMeta(name=name)
        out.next_cluster_id = cid + 1
    elif edit.kind == "delete_cluster":
        cid = int(payload["cluster_id"])
        if cid not in out.clusters:
            raise ValidationError(f"unknown cluster {cid}")
        members = out.clusters[cid]
        reassign_to = payload.get("reassign_to")
        if members and reassign_to is None:
            raise ValidationError(
                f"cluster {cid} is not empty; pass reassign_to or move its sentences first"
            )
        if reassign_to is not None:
            target = int(reassign_to)
            if target == cid or target not in out.clusters:
                raise ValidationError(f"invalid reassignment target {reassign_to}")
            out.clusters[target].update(members)
        del out.clusters[cid]
        out.meta.pop(cid, None)
    elif edit.kind == "set_meta":
        cid = int(payload["cluster_id"])
        if cid not in out.clusters:
            raise ValidationError(f"unknown cluster {cid}")
        current = out.meta.get(cid, ClusterMeta())
        updates = {
            key: payload[key]
            for key in ("name", "color", "desirability", "note")
            if key in payload
        }
        if "desirability" in updates and updates["desirability"] not in DESIRABILITY:
            raise ValidationError(
                f"desirability must be one of {DESIRABILITY}, got {updates['desirability']!r}"
            )
        out.meta[cid] = replace(current, **updates)
    else:
        raise ValidationError(f"unknown edit kind {edit.kind!r}")
    return out


@dataclass
class ReviewProject:
    """Base assignment plus edit log; ``state`` is their pure replay."""

    project_id: str
    dataset: Dataset
    base: ClusterAssignment
    dataset_path: str = ""
    run_path: str = ""
    edit_log: list[Edit] = field(default_factory=list)
    reference_essay_ids: set[str] = field(default_factory=set)
    _state: ProjectState | None = None

    @property
    def version(self) -> int:
        return self.edit_log[-1].edit_id if self.edit_log else 0

    @property
    def state(self) -> ProjectState:
        if self._state is None:
            self._state = self.replay()
        return self._state

    def replay(self) -> ProjectState:
        state = _base_state(self.base)
        for edit in self.edit_log:
            state = apply_edit_to_state(state, edit)
        return state

    def apply_edit(
        self,
        kind: str,
        payload: Mapping[str, Any],
        actor: str = "",
        expected_version: int | None = None,
    ) -> Edit:
        """Validate, apply and log one edit; returns the logged edit.

        ``expected_version`` supports optimistic concurrency: when given and
        different from the current version the edit is rejected as stale.
        """
        if kind not in EDIT_KINDS:
            raise ValidationError(f"unknown edit kind {kind!r}")
        if expected_version is not None and expected_version != self.version:
            raise EditConflictError(
                f"stale edit: expected version {expected_version}, project is at "
                f"{self.version}; reload state and retry"
            )
        if kind == "move_sentence":
            sentence_id = payload.get("sentence_id")
            if not sentence_id or sentence_id not in self.dataset:
                raise ValidationError(f"unknown sentence id {sentence_id!r}")
        edit = Edit(
            edit_id=self.version + 1,
            kind=kind,
            payload=dict(payload),
            timestamp=time.time(),
            actor=actor,
        )
        self._state = apply_edit_to_state(self.state, edit)
        self.edit_log.append(edit)
        return edit

    def overlap_with_reference(self, essay_id: str) -> OverlapScore:
        """How many reference-answer clusters this essay touches.

        A cluster is shared when it contains at least one sentence of the
        essay and at least one sentence of any reference essay.
        """
        if not self.reference_essay_ids:
            raise ValidationError("no reference essays designated for this project")
        essay_ids = {s.essay_id for s in self.dataset}
        if essay_id not in essay_ids:
            raise ValidationError(f"unknown essay id {essay_id}")
        reference_sentences = {
            s.sentence_id
            for s in self.dataset
            if s.essay_id in self.reference_essay_ids
        }
        essay_sentences = {
            s.sentence_id for s in self.dataset if s.essay_id == essay_id
        }
        reference_clusters = {
            cid for cid, ids in self.state.clusters.items() if ids & reference_sentences
        }
        shared = {
            cid for cid in reference_clusters if self.state.clusters[cid] & essay_sentences
        }
        coverage = len(shared) / len(reference_clusters) if reference_clusters else 0.0
        return OverlapScore(
            essay_id=essay_id,
            shared_clusters=len(shared),
            reference_clusters=len(reference_clusters),
            coverage=coverage,
        )

    def metrics(self) -> dict[str, Any]:
        """Refreshable numbers for the current state."""
        state = self.state
        out: dict[str, Any] = {
            "num_clusters": len(state.clusters),
            "num_sentences": len(self.dataset),
            "num_edits": len(self.edit_log),
            "version": self.version,
        }
        if any(s.labels for s in self.dataset):
            labeled = with_singleton_labels(self.dataset)
            flat: dict[str, int] = {}
            for cid, ids in state.clusters.items():
                for sentence_id in ids:
                    flat[sentence_id] = cid
            out["cluster_accuracy"] = cluster_accuracy(flat, labeled)
        return out


def create_project(
    dataset: Dataset,
    assignment: ClusterAssignment,
    project_id: str | None = None,
    dataset_path: str = "",
    run_path: str = "",
    reference_essay_ids: set[str] | None = None,
) -> ReviewProject:
    """Bind a dataset and an assignment into a fresh project with no edits."""
    missing = [s.sentence_id for s in dataset if s.sentence_id not in assignment.assignment]
    if missing:
        raise ValidationError(f"assignment misses sentence ids {missing}")
    extra = [sid for sid in assignment.assignment if sid not in dataset]
    if extra:
        raise ValidationError(f"assignment covers unknown sentence ids {extra}")
    if reference_essay_ids:
        essay_ids = {s.essay_id for s in dataset}
        unknown = sorted(set(reference_essay_ids) - essay_ids)
        if unknown:
            raise ValidationError(f"unknown reference essay ids {unknown}")
    return ReviewProject(
        project_id=project_id or uuid.uuid4().hex[:12],
        dataset=dataset,
        base=assignment,
        dataset_path=dataset_path,
        run_path=run_path,
        reference_essay_ids=set(reference_essay_ids or ()),
    )


def project_to_doc(project: ReviewProject) -> dict[str, Any]:
    state = project.state
    return {
        "format": PROJECT_FORMAT,
        "version": PROJECT_VERSION,
        "project_id": project.project_id,
        "dataset_path": project.dataset_path,
        "run_path": project.run_path,
        "reference_essay_ids": sorted(project.reference_essay_ids),
        "base": {
            "backend_id": project.base.backend_id,
            "k": project.base.k,
            "assignment": dict(sorted(project.base.assignment.items())),
            "merge_history": [
                [s.cluster_a, s.cluster_b, s.cost] for s in project.base.merge_history
            ],
            "num_empty_vectors": project.base.num_empty_vectors,
        },
        "edit_log": [
            {
                "edit_id": e.edit_id,
                "kind": e.kind,
                "payload": e.payload,
                "timestamp": e.timestamp,
                "actor": e.actor,
            }
            for e in project.edit_log
        ],
        "cluster_meta": {
            str(cid): {
                "name": meta.name,
                "color": meta.color,
                "desirability": meta.desirability,
                "note": meta.note,
            }
            for cid, meta in sorted(state.meta.items())
        },
    }


def save_project(project: ReviewProject, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(project_to_doc(project), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_project(path: str | Path, dataset: Dataset | None = None) -> ReviewProject:
    """Load a project file; the dataset is reloaded from its recorded path
    unless one is passed in (paths resolve relative to the project file)."""
    from .corpus import load_dataset

    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("format") != PROJECT_FORMAT:
        raise ValidationError(f"{path}: not a review project file")
    if dataset is None:
        dataset_path = doc.get("dataset_path", "")
        if not dataset_path:
            raise ValidationError(f"{path}: project has no dataset path; pass a dataset")
        resolved = Path(dataset_path)
        if not resolved.is_absolute():
            resolved = path.parent / resolved
        dataset = load_dataset(resolved)
    base_doc = doc["base"]
    base = ClusterAssignment(
        backend_id=str(base_doc["backend_id"]),
        k=int(base_doc["k"]),
        assignment={str(s): int(c) for s, c in base_doc["assignment"].items()},
        merge_history=tuple(
            MergeStep(cluster_a=str(a), cluster_b=str(b), cost=float(c))
            for a, b, c in base_doc["merge_history"]
        ),
        num_empty_vectors=int(base_doc.get("num_empty_vectors", 0)),
    )
    project = ReviewProject(
        project_id=str(doc["project_id"]),
        dataset=dataset,
        base=base,
        dataset_path=str(doc.get("dataset_path", "")),
        run_path=str(doc.get("run_path", "")),
        edit_log=[
            Edit(
                edit_id=int(e["edit_id"]),
                kind=str(e["kind"]),
                payload=dict(e["payload"]),
                timestamp=float(e["timestamp"]),
                actor=str(e.get("actor", "")),
            )
            for e in doc.get("edit_log", [])
        ],
        reference_essay_ids=set(doc.get("reference_essay_ids", [])),
    )
    return project


def _is_project_file(path: Path) -> bool:
    """True when the file parses as a project doc; other JSON files (pipeline
    artifacts often share the directory) are ignored by the store."""
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return False
    return isinstance(doc, dict) and doc.get("format") == PROJECT_FORMAT


class ProjectStore:
    """Directory of project files with per-project single-writer locks.

    The lock is a sidecar file holding an opaque token; mutating operations
    must present the token. Readers are unrestricted.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _project_path(self, project_id: str) -> Path:
        return self.root / f"{project_id}.json"

    def _lock_path(self, project_id: str) -> Path:
        return self.root / f"{project_id}.lock"

    def list_projects(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json") if _is_project_file(p))

    def exists(self, project_id: str) -> bool:
        return self._project_path(project_id).exists()

    def save(self, project: ReviewProject) -> None:
        save_project(project, self._project_path(project.project_id))

    def load(self, project_id: str, dataset: Dataset | None = None) -> ReviewProject:
        path = self._project_path(project_id)
        if not path.exists():
            raise KeyError(f"unknown project {project_id}")
        return load_project(path, dataset=dataset)

    def acquire_lock(self, project_id: str) -> str:
        lock = self._lock_path(project_id)
        if lock.exists():
            raise EditConflictError(
                f"project {project_id} is locked by another editing session; "
                "retry after it releases the lock"
            )
        token = uuid.uuid4().hex
        lock.write_text(token, encoding="utf-8")
        return token

    def release_lock(self, project_id: str, token: str) -> None:
        lock = self._lock_path(project_id)
        if not lock.exists():
            return
        if lock.read_text(encoding="utf-8") != token:
            raise EditConflictError("lock is held by a different session")
        lock.unlink()

    def check_lock(self, project_id: str, token: str | None) -> None:
        lock = self._lock_path(project_id)
        if not lock.exists():
            raise EditConflictError(
                f"no editing lock held for project {project_id}; acquire one first"
            )
        if token is None or lock.read_text(encoding="utf-8") != token:
            raise EditConflictError(
                "editing lock is held by a different session; retry later"
            )

    def lock_holder_exists(self, project_id: str) -> bool:
        return self._lock_path(project_id).exists()
