"""Annotated essay cohorts: loading, validation, segmentation and statistics.

A dataset is a cohort of essays, each segmented into sentences, each sentence
carrying zero or more argument labels. Datasets are immutable after loading
and safe to share between workers.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator

SINGLETON_PREFIX = "__singleton__"

_LABEL_RE = re.compile(r"[a-z0-9_]+\Z")


class ValidationError(ValueError):
    """Raised when an input file or record violates the data model."""


def normalize_label(raw: str) -> str:
    """Lowercase a label and replace internal whitespace runs with ``_``."""
    return "_".join(raw.strip().lower().split())


@dataclass(frozen=True)
class AnnotatedSentence:
    """One sentence of one essay, with its argument labels (possibly none)."""

    sentence_id: str
    essay_id: str
    text: str
    labels: frozenset[str] = frozenset()
    lemma_text: str | None = None


@dataclass(frozen=True)
class Essay:
    essay_id: str
    sentences: tuple[AnnotatedSentence, ...]
    prompt_id: str = ""


@dataclass(frozen=True)
class Dataset:
    """A validated cohort. ``sentences`` preserves input record order."""

    sentences: tuple[AnnotatedSentence, ...]

    @cached_property
    def essays(self) -> tuple[Essay, ...]:
        by_essay: dict[str, list[AnnotatedSentence]] = {}
        for sent in self.sentences:
            by_essay.setdefault(sent.essay_id, []).append(sent)
        return tuple(
            Essay(essay_id=eid, sentences=tuple(sents)) for eid, sents in by_essay.items()
        )

    @cached_property
    def _by_id(self) -> dict[str, AnnotatedSentence]:
        return {s.sentence_id: s for s in self.sentences}

    def sentence(self, sentence_id: str) -> AnnotatedSentence:
        try:
            return self._by_id[sentence_id]
        except KeyError:
            raise KeyError(f"unknown sentence id {sentence_id}") from None

    def __contains__(self, sentence_id: str) -> bool:
        return sentence_id in self._by_id

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[AnnotatedSentence]:
        return iter(self.sentences)


@dataclass(frozen=True)
class DatasetStats:
    num_essays: int
    num_sentences: int
    num_labels: int
    avg_labels_per_sentence: float
    labels_per_sentence_histogram: dict[int, int] = field(default_factory=dict)
    label_occurrence: dict[str, int] = field(default_factory=dict)


def _validate_sentences(raw: Iterable[AnnotatedSentence]) -> Dataset:
    seen: set[str] = set()
    sentences: list[AnnotatedSentence] = []
    for sent in raw:
        if sent.sentence_id in seen:
            raise ValidationError(f"duplicate sentence id {sent.sentence_id}")
        seen.add(sent.sentence_id)
        if not sent.text.strip():
            raise ValidationError(f"empty text for sentence {sent.sentence_id}")
        for label in sent.labels:
            if label.startswith(SINGLETON_PREFIX):
                raise ValidationError(
                    f"label {label!r} on sentence {sent.sentence_id} uses the "
                    f"reserved prefix {SINGLETON_PREFIX}"
                )
            if not _LABEL_RE.match(label):
                raise ValidationError(
                    f"label {label!r} on sentence {sent.sentence_id} is not "
                    "normalizable to [a-z0-9_]+"
                )
        sentences.append(sent)
    return Dataset(sentences=tuple(sentences))


def _sentence_from_fields(
    essay_id: str,
    sentence_id: str,
    text: str,
    lemma_text: str | None,
    labels: Iterable[str],
    where: str,
) -> AnnotatedSentence:
    normalized = [normalize_label(lbl) for lbl in labels]
    if any(not lbl for lbl in normalized):
        raise ValidationError(f"{where}: empty label")
    label_set = frozenset(normalized)
    if len(label_set) != len(normalized):
        raise ValidationError(f"{where}: duplicate labels after normalization")
    return AnnotatedSentence(
        sentence_id=sentence_id,
        essay_id=essay_id,
        text=text,
        labels=label_set,
        lemma_text=lemma_text if lemma_text else None,
    )


def _load_jsonl(path: Path) -> Iterator[AnnotatedSentence]:
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{where}: invalid JSON ({exc})") from exc
            missing = {"essay_id", "sentence_id", "text"} - record.keys()
            if missing:
                raise ValidationError(f"{where}: missing fields {sorted(missing)}")
            yield _sentence_from_fields(
                essay_id=str(record["essay_id"]),
                sentence_id=str(record["sentence_id"]),
                text=str(record["text"]),
                lemma_text=record.get("lemma_text"),
                labels=record.get("labels") or [],
                where=where,
            )


_TSV_COLUMNS = ["essay_id", "sentence_id", "text", "lemma_text", "labels"]


def _load_tsv(path: Path) -> Iterator[AnnotatedSentence]:
    with path.open(encoding="utf-8") as fh:
        header_line = fh.readline()
        header = header_line.rstrip("\n").split("\t")
        if header != _TSV_COLUMNS:
            raise ValidationError(
                f"{path}: expected header {_TSV_COLUMNS}, got {header}"
            )
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            cells = line.rstrip("\n").split("\t")
            if len(cells) != len(_TSV_COLUMNS):
                raise ValidationError(f"{where}: expected {len(_TSV_COLUMNS)} columns")
            essay_id, sentence_id, text, lemma_text, labels = cells
            yield _sentence_from_fields(
                essay_id=essay_id,
                sentence_id=sentence_id,
                text=text,
                lemma_text=lemma_text or None,
                labels=[lbl for lbl in labels.split(",") if lbl.strip()],
                where=where,
            )


def load_dataset(path: str | Path, format: str = "jsonl") -> Dataset:
    """Load and validate a cohort from a JSONL or TSV annotation file.

    JSONL records carry ``essay_id``, ``sentence_id``, ``text``, optional
    ``lemma_text`` and a ``labels`` list. The TSV form has the same fields as
    tab-separated columns with a header row; labels are comma-separated.
    Rejects the whole file on the first invalid record.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"dataset file not found: {path}")
    if format == "jsonl":
        records = _load_jsonl(path)
    elif format == "tsv":
        records = _load_tsv(path)
    else:
        raise ValidationError(f"unknown dataset format {format!r}")
    return _validate_sentences(records)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a cohort back to JSONL; inverse of :func:`load_dataset`."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for sent in dataset:
            record = {
                "essay_id": sent.essay_id,
                "sentence_id": sent.sentence_id,
                "text": sent.text,
                "lemma_text": sent.lemma_text,
                "labels": sorted(sent.labels),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


_TERMINAL = ".!?"


def segment_text(text: str, abbreviations: Iterable[str] = ()) -> list[str]:
    """Split a raw essay into sentences.

    A boundary is a run of terminal punctuation (``. ! ?``) followed by
    whitespace and an uppercase letter or a digit. Boundaries directly after
    a token in ``abbreviations`` (compared case-insensitively, including the
    trailing period) are suppressed. Joining the segments with single spaces
    reproduces the input up to whitespace.
    """
    stoplist = {a.lower() for a in abbreviations}
    segments: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINAL:
            j = i
            while j + 1 < n and text[j + 1] in _TERMINAL:
                j += 1
            k = j + 1
            while k < n and text[k].isspace():
                k += 1
            if k > j + 1 and k < n and (text[k].isupper() or text[k].isdigit()):
                word_start = i
                while word_start > start and not text[word_start - 1].isspace():
                    word_start -= 1
                token = text[word_start : j + 1].lower()
                if token not in stoplist:
                    segment = text[start : j + 1].strip()
                    if segment:
                        segments.append(segment)
                    start = k
                    i = k
                    continue
            i = j + 1
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        segments.append(tail)
    return segments


def dataset_stats(dataset: Dataset) -> DatasetStats:
    """Cohort-level counts: essays, sentences, labels and label multiplicity."""
    histogram = Counter(len(s.labels) for s in dataset)
    occurrence = Counter(label for s in dataset for label in s.labels)
    num_sentences = len(dataset)
    total_labels = sum(len(s.labels) for s in dataset)
    return DatasetStats(
        num_essays=len({s.essay_id for s in dataset}),
        num_sentences=num_sentences,
        num_labels=len(occurrence),
        avg_labels_per_sentence=total_labels / num_sentences if num_sentences else 0.0,
        labels_per_sentence_histogram=dict(sorted(histogram.items())),
        label_occurrence=dict(sorted(occurrence.items())),
    )


def render_stats(stats: DatasetStats) -> str:
    """Plain-text summary: headline counts plus the two distributions."""
    lines = [
        f"Essays:              {stats.num_essays}",
        f"Sentences:           {stats.num_sentences}",
        f"Distinct labels:     {stats.num_labels}",
        f"Avg labels/sentence: {stats.avg_labels_per_sentence:.2f}",
        "",
        "Labels per sentence:",
    ]
    for count, freq in stats.labels_per_sentence_histogram.items():
        lines.append(f"  {count}: {freq}")
    lines.append("")
    lines.append("Label occurrence:")
    for label, freq in stats.label_occurrence.items():
        lines.append(f"  {label}: {freq}")
    return "\n".join(lines) + "\n"


def with_singleton_labels(dataset: Dataset) -> Dataset:
    """Give every unlabeled sentence a unique synthetic label.

    Labeled sentences pass through unchanged, so the transformation is
    idempotent. Synthetic labels never collide with real ones because the
    ``__singleton__`` prefix is rejected at load time.
    """
    sentences = tuple(
        sent
        if sent.labels
        else replace(sent, labels=frozenset({f"{SINGLETON_PREFIX}{sent.sentence_id}"}))
        for sent in dataset
    )
    return Dataset(sentences=sentences)
