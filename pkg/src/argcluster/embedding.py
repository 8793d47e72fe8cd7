"""Sentence vector backends and cosine similarity.

Three interchangeable backends produce one vector per sentence: character
n-gram TF-IDF (sparse), word-vector averaging (dense), and ingestion of
precomputed vectors (dense). All backends are deterministic: the same inputs
yield bit-identical vectors regardless of worker count or input order.
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Dataset, ValidationError

TFIDF_MODEL_FORMAT = "argcluster-tfidf-model"
TFIDF_MODEL_VERSION = 1


@dataclass(frozen=True)
class SentenceVector:
    """One sentence's embedding, dense (ndarray) or sparse (index->weight)."""

    sentence_id: str
    dim: int
    values: np.ndarray | dict[int, float]
    empty: bool = False

    def __post_init__(self) -> None:
        if self.is_sparse:
            for idx, weight in self.values.items():
                if not 0 <= idx < self.dim:
                    raise ValidationError(
                        f"sparse index {idx} out of range for dim {self.dim}"
                    )
                if weight == 0.0:
                    raise ValidationError("sparse vectors must not store zero weights")

    @property
    def is_sparse(self) -> bool:
        return isinstance(self.values, dict)

    def norm(self) -> float:
        if self.is_sparse:
            return math.sqrt(sum(w * w for w in self.values.values()))
        return float(np.linalg.norm(self.values))

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            out = np.zeros(self.dim)
            for idx, weight in self.values.items():
                out[idx] = weight
            return out
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class EmbeddingMatrix:
    """One SentenceVector per dataset sentence, in dataset order."""

    backend_id: str
    dim: int
    rows: tuple[SentenceVector, ...]

    def __post_init__(self) -> None:
        seen = set()
        for row in self.rows:
            if row.dim != self.dim:
                raise ValidationError(
                    f"row {row.sentence_id} has dim {row.dim}, expected {self.dim}"
                )
            if row.sentence_id in seen:
                raise ValidationError(f"duplicate row for sentence {row.sentence_id}")
            seen.add(row.sentence_id)

    @cached_property
    def _by_id(self) -> dict[str, SentenceVector]:
        return {row.sentence_id: row for row in self.rows}

    def row(self, sentence_id: str) -> SentenceVector:
        try:
            return self._by_id[sentence_id]
        except KeyError:
            raise KeyError(f"no vector for sentence id {sentence_id}") from None

    def __contains__(self, sentence_id: str) -> bool:
        return sentence_id in self._by_id


def tokenize(text: str) -> list[str]:
    """Split on Unicode whitespace, strip edge punctuation, lowercase."""
    tokens = []
    for raw in text.split():
        token = raw.lower()
        start, end = 0, len(token)
        while start < end and unicodedata.category(token[start]).startswith("P"):
            start += 1
        while end > start and unicodedata.category(token[end - 1]).startswith("P"):
            end -= 1
        if end > start:
            tokens.append(token[start:end])
    return tokens


def char_ngrams(token: str, n_min: int = 2, n_max: int = 5) -> Counter[str]:
    """All contiguous character n-grams of a single token, as a multiset.

    N-grams never cross word boundaries; the caller tokenizes first. A token
    shorter than ``n`` contributes no n-grams of that length.
    """
    if any(ch.isspace() for ch in token):
        raise ValueError(f"token {token!r} contains whitespace")
    grams: Counter[str] = Counter()
    size = len(token)
    for n in range(n_min, n_max + 1):
        for start in range(size - n + 1):
            grams[token[start : start + n]] += 1
    return grams


def _sentence_ngrams(text: str, n_min: int, n_max: int) -> Counter[str]:
    grams: Counter[str] = Counter()
    for token in tokenize(text):
        grams.update(char_ngrams(token, n_min, n_max))
    return grams


def embedding_text(sentence) -> str:
    """TF-IDF input: the lemmatized form when provided, raw text otherwise."""
    return sentence.lemma_text if sentence.lemma_text else sentence.text


@dataclass(frozen=True)
class TfidfModel:
    """Fitted character n-gram TF-IDF vocabulary and idf weights."""

    vocabulary: dict[str, int]
    idf: np.ndarray
    ngram_range: tuple[int, int] = (2, 5)
    analyzer: str = "char-within-words"

    def to_json(self) -> str:
        doc = {
            "format": TFIDF_MODEL_FORMAT,
            "version": TFIDF_MODEL_VERSION,
            "analyzer": self.analyzer,
            "ngram_range": list(self.ngram_range),
            "vocabulary": self.vocabulary,
            "idf": self.idf.tolist(),
        }
        return json.dumps(doc, ensure_ascii=False)

    @classmethod
    def from_json(cls, payload: str) -> TfidfModel:
        doc = json.loads(payload)
        if doc.get("format") != TFIDF_MODEL_FORMAT:
            raise ValidationError("not a TF-IDF model document")
        if doc.get("version") != TFIDF_MODEL_VERSION:
            raise ValidationError(f"unsupported model version {doc.get('version')}")
        return cls(
            vocabulary=dict(doc["vocabulary"]),
            idf=np.asarray(doc["idf"], dtype=float),
            ngram_range=tuple(doc["ngram_range"]),
            analyzer=doc["analyzer"],
        )


def fit_tfidf(
    sentences: Sequence[str], ngram_range: tuple[int, int] = (2, 5)
) -> TfidfModel:
    """Fit vocabulary and smoothed idf weights on a corpus of sentences.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1 with N the number of sentences and
    df the number of sentences containing the n-gram. Vocabulary columns are
    assigned in lexicographic n-gram order, so fitting is order-independent.
    """
    if not sentences:
        raise ValidationError("cannot fit TF-IDF on an empty corpus")
    n_min, n_max = ngram_range
    df: Counter[str] = Counter()
    for text in sentences:
        df.update(set(_sentence_ngrams(text, n_min, n_max)))
    if not df:
        raise ValidationError("corpus yields no character n-grams")
    vocabulary = {gram: idx for idx, gram in enumerate(sorted(df))}
    n_docs = len(sentences)
    idf = np.empty(len(vocabulary))
    for gram, idx in vocabulary.items():
        idf[idx] = math.log((1 + n_docs) / (1 + df[gram])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf, ngram_range=(n_min, n_max))


def tfidf_embed(model: TfidfModel, sentence_text: str, sentence_id: str = "") -> SentenceVector:
    """Sparse, L2-normalized tf.idf vector; out-of-vocabulary n-grams dropped.

    A sentence with no in-vocabulary n-grams yields a zero vector flagged
    ``empty``.
    """
    n_min, n_max = model.ngram_range
    counts = _sentence_ngrams(sentence_text, n_min, n_max)
    weights: dict[int, float] = {}
    for gram, count in counts.items():
        idx = model.vocabulary.get(gram)
        if idx is not None:
            weights[idx] = count * float(model.idf[idx])
    dim = len(model.vocabulary)
    if not weights:
        return SentenceVector(sentence_id=sentence_id, dim=dim, values={}, empty=True)
    ordered = {idx: weights[idx] for idx in sorted(weights)}
    norm = math.sqrt(sum(w * w for w in ordered.values()))
    normalized = {idx: w / norm for idx, w in ordered.items()}
    return SentenceVector(sentence_id=sentence_id, dim=dim, values=normalized)


@dataclass(frozen=True)
class WordVectorTable:
    """Token to dense vector lookup, all vectors sharing one dimensionality."""

    vectors: dict[str, np.ndarray]
    dim: int

    def __contains__(self, token: str) -> bool:
        return token in self.vectors


def load_word_vectors(path: str | Path) -> WordVectorTable:
    """Read a text word-vector table: ``<count> <dim>`` then one token per line."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValidationError(f"{path}: expected '<count> <dim>' header")
        expected_count, dim = int(header[0]), int(header[1])
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ValidationError(
                    f"{path}:{lineno}: expected {dim + 1} fields, got {len(parts)}"
                )
            vectors[parts[0]] = np.asarray([float(x) for x in parts[1:]])
    if len(vectors) != expected_count:
        raise ValidationError(
            f"{path}: header promises {expected_count} vectors, found {len(vectors)}"
        )
    return WordVectorTable(vectors=vectors, dim=dim)


def average_embed(
    table: WordVectorTable, sentence_text: str, sentence_id: str = ""
) -> SentenceVector:
    """Componentwise mean of the word vectors of in-vocabulary tokens.

    Tokens are summed in sorted order so the result is independent of token
    order. All tokens out of vocabulary yields a zero vector flagged ``empty``.
    """
    known = sorted(t for t in tokenize(sentence_text) if t in table.vectors)
    if not known:
        return SentenceVector(
            sentence_id=sentence_id, dim=table.dim, values=np.zeros(table.dim), empty=True
        )
    total = np.zeros(table.dim)
    for token in known:
        total += table.vectors[token]
    return SentenceVector(sentence_id=sentence_id, dim=table.dim, values=total / len(known))


def tfidf_matrix(dataset: Dataset, model: TfidfModel | None = None) -> EmbeddingMatrix:
    """Fit (unless given) and apply the TF-IDF backend over a whole cohort."""
    if model is None:
        model = fit_tfidf([embedding_text(s) for s in dataset])
    rows = tuple(
        tfidf_embed(model, embedding_text(s), sentence_id=s.sentence_id) for s in dataset
    )
    return EmbeddingMatrix(backend_id="tfidf", dim=len(model.vocabulary), rows=rows)


def average_matrix(dataset: Dataset, table: WordVectorTable) -> EmbeddingMatrix:
    """Apply the word-vector-averaging backend over a whole cohort."""
    rows = tuple(
        average_embed(table, s.text, sentence_id=s.sentence_id) for s in dataset
    )
    return EmbeddingMatrix(backend_id="word-average", dim=table.dim, rows=rows)


def load_precomputed(
    path: str | Path, dataset: Dataset, backend_id: str | None = None
) -> EmbeddingMatrix:
    """Ingest an externally produced sentence-vector file (JSONL).

    Each line carries ``{"sentence_id": ..., "vector": [...]}``. Every dataset
    sentence must be covered; vectors are stored exactly as given, without
    renormalization.
    """
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            sid = str(record["sentence_id"])
            vec = np.asarray(record["vector"], dtype=float)
            if dim is None:
                dim = int(vec.shape[0])
            elif vec.shape[0] != dim:
                raise ValidationError(
                    f"{path}:{lineno}: vector for {sid} has dim {vec.shape[0]}, "
                    f"expected {dim}"
                )
            vectors[sid] = vec
    missing = [s.sentence_id for s in dataset if s.sentence_id not in vectors]
    if missing:
        raise ValidationError(f"{path}: missing vectors for sentence ids {missing}")
    if dim is None:
        raise ValidationError(f"{path}: no vectors found")
    rows = tuple(
        SentenceVector(
            sentence_id=s.sentence_id,
            dim=dim,
            values=vectors[s.sentence_id],
            empty=not np.any(vectors[s.sentence_id]),
        )
        for s in dataset
    )
    if backend_id is None:
        backend_id = f"precomputed:{path.name}"
    return EmbeddingMatrix(backend_id=backend_id, dim=dim, rows=rows)


def _dot(u: SentenceVector, v: SentenceVector) -> float:
    if u.is_sparse and v.is_sparse:
        small, large = (u.values, v.values) if len(u.values) <= len(v.values) else (v.values, u.values)
        return sum(w * large[idx] for idx, w in small.items() if idx in large)
    if u.is_sparse or v.is_sparse:
        sparse, dense = (u, v) if u.is_sparse else (v, u)
        arr = dense.values
        return sum(w * float(arr[idx]) for idx, w in sparse.values.items())
    return float(np.dot(u.values, v.values))


def cosine_similarity(u: SentenceVector, v: SentenceVector) -> float:
    """Cosine of the angle between two vectors, in [-1, 1].

    Pairs involving a zero or empty-flagged vector are degenerate and score
    0.0, keeping downstream rankings total.
    """
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    if u.empty or v.empty:
        return 0.0
    norm_u, norm_v = u.norm(), v.norm()
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    return _dot(u, v) / (norm_u * norm_v)


def is_degenerate_pair(u: SentenceVector, v: SentenceVector) -> bool:
    return u.empty or v.empty or u.norm() == 0.0 or v.norm() == 0.0


def save_matrix(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Persist a matrix as JSONL: a header record, then one row per sentence."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        header = {
            "kind": "embedding_matrix",
            "backend_id": matrix.backend_id,
            "dim": matrix.dim,
        }
        fh.write(json.dumps(header) + "\n")
        for row in matrix.rows:
            record: dict = {"sentence_id": row.sentence_id}
            if row.is_sparse:
                record["indices"] = list(row.values.keys())
                record["weights"] = list(row.values.values())
            else:
                record["vector"] = row.values.tolist()
            if row.empty:
                record["empty"] = True
            fh.write(json.dumps(record) + "\n")


def load_matrix(path: str | Path) -> EmbeddingMatrix:
    """Inverse of :func:`save_matrix`."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != "embedding_matrix":
            raise ValidationError(f"{path}: not an embedding matrix file")
        dim = int(header["dim"])
        rows = []
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            if "vector" in record:
                values: np.ndarray | dict[int, float] = np.asarray(
                    record["vector"], dtype=float
                )
            else:
                values = {
                    int(i): float(w)
                    for i, w in zip(record["indices"], record["weights"])
                }
            rows.append(
                SentenceVector(
                    sentence_id=str(record["sentence_id"]),
                    dim=dim,
                    values=values,
                    empty=bool(record.get("empty", False)),
                )
            )
    return EmbeddingMatrix(
        backend_id=str(header["backend_id"]), dim=dim, rows=tuple(rows)
    )
