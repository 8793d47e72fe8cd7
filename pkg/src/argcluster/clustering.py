"""Agglomerative Ward clustering of sentence vectors into a known cluster count.

Merging is bottom-up: at each step the pair of clusters whose union least
increases total within-cluster variance is joined, i.e. the pair minimizing

    cost(A, B) = |A||B| / (|A| + |B|) * ||centroid(A) - centroid(B)||^2

Costs are maintained with the Lance-Williams recurrence. Exact cost ties are
broken by the lexicographically smallest (min sentence id of A, min sentence
id of B) pair, which also makes the result independent of input row order:
rows are re-sorted by sentence id internally before any arithmetic.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import SINGLETON_PREFIX, Dataset, ValidationError
from .embedding import EmbeddingMatrix, SentenceVector


@dataclass(frozen=True)
class MergeStep:
    cluster_a: str  # min sentence id of the absorbing cluster
    cluster_b: str  # min sentence id of the absorbed cluster
    cost: float


@dataclass(frozen=True)
class ClusterAssignment:
    """A partition of sentence ids into k clusters plus its merge provenance.

    Cluster indices are assigned in order of each cluster's smallest sentence
    id, so equal partitions always carry equal indices.
    """

    backend_id: str
    k: int
    assignment: dict[str, int]
    merge_history: tuple[MergeStep, ...]
    num_empty_vectors: int = 0

    def members(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {index: [] for index in range(self.k)}
        for sentence_id, index in self.assignment.items():
            out[index].append(sentence_id)
        for ids in out.values():
            ids.sort()
        return out


def true_cluster_count(dataset: Dataset, override: int | None = None) -> int:
    """Distinct real labels plus one singleton cluster per unlabeled sentence.

    ``override`` imposes an externally known count instead (the rule cannot
    reconstruct counts chosen by a human annotation round).
    """
    n = len(dataset)
    if override is not None:
        if not 1 <= override <= n:
            raise ValidationError(f"cluster count {override} outside 1..{n}")
        return override
    real_labels = set()
    unlabeled = 0
    for sentence in dataset:
        labels = {lbl for lbl in sentence.labels if not lbl.startswith(SINGLETON_PREFIX)}
        if labels:
            real_labels.update(labels)
        else:
            unlabeled += 1
    k = len(real_labels) + unlabeled
    if k > n:
        raise ValidationError(
            f"derived cluster count {k} exceeds the {n} sentences; pass an override"
        )
    return k


def _normalized(vector: SentenceVector) -> SentenceVector:
    if vector.empty:
        return vector
    norm = vector.norm()
    if norm == 0.0:
        return vector
    if vector.is_sparse:
        values: dict[int, float] | np.ndarray = {
            idx: w / norm for idx, w in vector.values.items()
        }
    else:
        values = vector.values / norm
    return SentenceVector(
        sentence_id=vector.sentence_id, dim=vector.dim, values=values, empty=vector.empty
    )


def _sparse_dot(u: dict[int, float], v: dict[int, float]) -> float:
    if len(u) > len(v):
        u, v = v, u
    return sum(w * v[idx] for idx, w in u.items() if idx in v)


def _initial_costs(vectors: list[SentenceVector]) -> np.ndarray:
    """Singleton merge costs ||xi - xj||^2 / 2 for all pairs."""
    n = len(vectors)
    if all(not v.is_sparse for v in vectors):
        x = np.stack([np.asarray(v.values, dtype=float) for v in vectors])
        sq = np.einsum("ij,ij->i", x, x)
        gram = x @ x.T
        costs = (sq[:, None] + sq[None, :] - 2.0 * gram) / 2.0
        costs = np.maximum(costs, 0.0)
        # force exact symmetry so the scan order cannot see BLAS asymmetries
        upper = np.triu(costs, k=1)
        costs = upper + upper.T
    else:
        sq = np.array([v.norm() ** 2 for v in vectors])
        costs = np.zeros((n, n))
        sparse = [v.values if v.is_sparse else None for v in vectors]
        for i in range(n):
            for j in range(i + 1, n):
                if sparse[i] is not None and sparse[j] is not None:
                    dot = _sparse_dot(sparse[i], sparse[j])
                else:
                    dot = float(np.dot(vectors[i].dense(), vectors[j].dense()))
                cost = max((sq[i] + sq[j] - 2.0 * dot) / 2.0, 0.0)
                costs[i, j] = cost
                costs[j, i] = cost
    np.fill_diagonal(costs, np.inf)
    return costs


def ward_cluster(
    matrix: EmbeddingMatrix, k: int, normalize: bool = True
) -> ClusterAssignment:
    """Cluster a cohort's vectors into exactly ``k`` groups with Ward linkage.

    Vectors are L2-normalized first (unless ``normalize=False``), making
    squared Euclidean distance a monotone function of cosine distance, the
    similarity used everywhere else. Empty-flagged zero vectors stay at the
    origin and are counted in ``num_empty_vectors``.
    """
    n = len(matrix.rows)
    if n == 0:
        raise ValidationError("cannot cluster an empty matrix")
    if not 1 <= k <= n:
        raise ValidationError(f"cluster count {k} outside 1..{n}")

    rows = sorted(matrix.rows, key=lambda r: r.sentence_id)
    vectors = [_normalized(r) if normalize else r for r in rows]
    num_empty = sum(1 for v in vectors if v.empty or v.norm() == 0.0)

    costs = _initial_costs(vectors)
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    members: list[list[str]] = [[r.sentence_id] for r in rows]
    history: list[MergeStep] = []

    for _ in range(n - k):
        best = np.min(costs[np.ix_(active, active)])
        hits = np.argwhere(costs == best)
        i, j = -1, -1
        for a, b in hits:
            if a < b and active[a] and active[b]:
                i, j = int(a), int(b)
                break
        # slots are in sentence-id order, so (i, j) is the lexicographically
        # smallest (min id of A, min id of B) among tied pairs
        n_a, n_b = sizes[i], sizes[j]
        cost_ab = costs[i, j]
        others = active.copy()
        others[i] = others[j] = False
        n_c = sizes[others]
        costs[i, others] = (
            (n_a + n_c) * costs[i, others]
            + (n_b + n_c) * costs[j, others]
            - n_c * cost_ab
        ) / (n_a + n_b + n_c)
        costs[others, i] = costs[i, others]
        costs[j, :] = np.inf
        costs[:, j] = np.inf
        sizes[i] = n_a + n_b
        active[j] = False
        members[i].extend(members[j])
        members[j] = []
        history.append(
            MergeStep(cluster_a=rows[i].sentence_id, cluster_b=rows[j].sentence_id, cost=float(cost_ab))
        )

    assignment: dict[str, int] = {}
    for index, slot in enumerate(np.flatnonzero(active)):
        for sentence_id in members[slot]:
            assignment[sentence_id] = index
    return ClusterAssignment(
        backend_id=matrix.backend_id,
        k=k,
        assignment=assignment,
        merge_history=tuple(history),
        num_empty_vectors=num_empty,
    )


def save_assignment(assignment: ClusterAssignment, path: str | Path) -> None:
    doc = {
        "kind": "cluster_assignment",
        "backend_id": assignment.backend_id,
        "k": assignment.k,
        "num_empty_vectors": assignment.num_empty_vectors,
        "assignment": {sid: idx for sid, idx in sorted(assignment.assignment.items())},
        "merge_history": [
            [step.cluster_a, step.cluster_b, step.cost] for step in assignment.merge_history
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_assignment(path: str | Path) -> ClusterAssignment:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("kind") != "cluster_assignment":
        raise ValidationError(f"{path}: not a cluster assignment file")
    return ClusterAssignment(
        backend_id=str(doc["backend_id"]),
        k=int(doc["k"]),
        assignment={str(s): int(c) for s, c in doc["assignment"].items()},
        merge_history=tuple(
            MergeStep(cluster_a=str(a), cluster_b=str(b), cost=float(c))
            for a, b, c in doc["merge_history"]
        ),
        num_empty_vectors=int(doc.get("num_empty_vectors", 0)),
    )


def save_assignment_csv(assignment: ClusterAssignment, path: str | Path) -> None:
    """Spreadsheet companion to the JSON form: sentence_id, cluster."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sentence_id", "cluster"])
        for sentence_id, index in sorted(assignment.assignment.items()):
            writer.writerow([sentence_id, index])
