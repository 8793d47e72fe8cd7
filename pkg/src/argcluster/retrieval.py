"""Cosine-similarity ranking of cohort sentences against each query sentence.

Every sentence in the cohort is, in turn, a query; all other sentences are
ranked by cosine similarity and marked relevant when they share at least one
label with the query. Queries with no relevant candidate anywhere in the
cohort cannot be scored and are skipped (the skip count is surfaced).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import AbstractSet

from .corpus import Dataset, ValidationError
from .embedding import EmbeddingMatrix, cosine_similarity


@dataclass(frozen=True)
class RankedEntry:
    candidate_id: str
    similarity: float
    relevant: bool


@dataclass(frozen=True)
class RankedList:
    """All candidates for one query, best first.

    Entries are sorted by similarity descending with ties broken by ascending
    candidate id; the query itself never appears.
    """

    query_id: str
    entries: tuple[RankedEntry, ...]
    num_candidates: int


@dataclass(frozen=True)
class RetrievalRun:
    backend_id: str
    lists: tuple[RankedList, ...]
    num_skipped_queries: int


def is_relevant(query_labels: AbstractSet[str], candidate_labels: AbstractSet[str]) -> bool:
    """True iff the two label sets overlap.

    Synthetic singleton labels are unique per sentence, so they never make a
    cross-sentence pair relevant.
    """
    return not query_labels.isdisjoint(candidate_labels)


def rank_candidates(
    query_id: str,
    matrix: EmbeddingMatrix,
    dataset: Dataset,
    cross_essay_only: bool = False,
) -> RankedList:
    """Rank every other sentence against one query.

    ``cross_essay_only`` drops candidates from the query's own essay, for the
    grading workflow where within-essay repetition is uninteresting.
    """
    if query_id not in matrix:
        raise KeyError(f"unknown query id {query_id}")
    query_sentence = dataset.sentence(query_id)
    query_vector = matrix.row(query_id)
    scored = []
    for candidate in dataset:
        if candidate.sentence_id == query_id:
            continue
        if cross_essay_only and candidate.essay_id == query_sentence.essay_id:
            continue
        similarity = cosine_similarity(query_vector, matrix.row(candidate.sentence_id))
        scored.append(
            RankedEntry(
                candidate_id=candidate.sentence_id,
                similarity=similarity,
                relevant=is_relevant(query_sentence.labels, candidate.labels),
            )
        )
    scored.sort(key=lambda e: (-e.similarity, e.candidate_id))
    return RankedList(query_id=query_id, entries=tuple(scored), num_candidates=len(scored))


def retrieve_all(
    dataset: Dataset, matrix: EmbeddingMatrix, cross_essay_only: bool = False
) -> RetrievalRun:
    """One RankedList per query sentence that has at least one relevant candidate."""
    lists = []
    skipped = 0
    for sentence in dataset:
        ranked = rank_candidates(
            sentence.sentence_id, matrix, dataset, cross_essay_only=cross_essay_only
        )
        if any(entry.relevant for entry in ranked.entries):
            lists.append(ranked)
        else:
            skipped += 1
    return RetrievalRun(
        backend_id=matrix.backend_id, lists=tuple(lists), num_skipped_queries=skipped
    )


def save_run(run: RetrievalRun, path: str | Path) -> None:
    """Persist a run as JSONL: a header record, then one RankedList per line."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        header = {
            "kind": "retrieval_run",
            "backend_id": run.backend_id,
            "num_skipped_queries": run.num_skipped_queries,
        }
        fh.write(json.dumps(header) + "\n")
        for ranked in run.lists:
            record = {
                "query_id": ranked.query_id,
                "num_candidates": ranked.num_candidates,
                "entries": [
                    [e.candidate_id, e.similarity, e.relevant] for e in ranked.entries
                ],
            }
            fh.write(json.dumps(record) + "\n")


def load_run(path: str | Path) -> RetrievalRun:
    """Inverse of :func:`save_run`."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != "retrieval_run":
            raise ValidationError(f"{path}: not a retrieval run file")
        lists = []
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            entries = tuple(
                RankedEntry(candidate_id=str(c), similarity=float(s), relevant=bool(r))
                for c, s, r in record["entries"]
            )
            lists.append(
                RankedList(
                    query_id=str(record["query_id"]),
                    entries=entries,
                    num_candidates=int(record["num_candidates"]),
                )
            )
    return RetrievalRun(
        backend_id=str(header["backend_id"]),
        lists=tuple(lists),
        num_skipped_queries=int(header["num_skipped_queries"]),
    )
