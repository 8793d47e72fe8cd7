from __future__ import annotations

import sys
from pathlib import Path

import pytest

from argcluster.corpus import AnnotatedSentence, Dataset, load_dataset

ROOT = Path(__file__).resolve().parent.parent
SCRIPTS = ROOT / "scripts"
GOLDEN = ROOT / "tests" / "golden"
SYNTHETIC = ROOT / "data" / "synthetic_corpus.jsonl"

# the oracle scripts double as second-route implementations for the tests
if str(SCRIPTS) not in sys.path:
    sys.path.insert(0, str(SCRIPTS))


def sent(
    sid: str,
    text: str = "placeholder text",
    labels: tuple[str, ...] = (),
    essay: str = "e1",
    lemma: str | None = None,
) -> AnnotatedSentence:
    return AnnotatedSentence(
        sentence_id=sid,
        essay_id=essay,
        text=text,
        labels=frozenset(labels),
        lemma_text=lemma,
    )


def dataset(*sentences: AnnotatedSentence) -> Dataset:
    return Dataset(sentences=tuple(sentences))


@pytest.fixture(scope="session")
def synthetic_path() -> Path:
    return SYNTHETIC


@pytest.fixture(scope="session")
def synthetic() -> Dataset:
    return load_dataset(SYNTHETIC)


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN
