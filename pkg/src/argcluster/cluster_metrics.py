"""Evaluating a clustering against multi-label ground truth.

Three measures: majority-label cluster accuracy (computed once on the full
multi-label annotation), and adjusted Rand index / adjusted mutual
information (computed via a repeated label-sampling protocol, since both
compare flat partitions and the annotation is multi-label).

ARI uses exact integer arithmetic, so identical partitions score exactly 1.0.
AMI uses natural-log entropies, the exact hypergeometric expectation of the
mutual information, and the arithmetic mean of the two entropies in the
denominator.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from math import comb, lgamma, log
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .corpus import AnnotatedSentence, Dataset


@dataclass(frozen=True)
class ContingencyTable:
    """Cross-tabulation of two partitions over the same items."""

    counts: tuple[tuple[int, ...], ...]
    row_marginals: tuple[int, ...]
    col_marginals: tuple[int, ...]
    n: int

    @classmethod
    def from_partitions(
        cls, pred: Sequence[Hashable], truth: Sequence[Hashable]
    ) -> ContingencyTable:
        if len(pred) != len(truth):
            raise ValueError("partitions cover different item counts")
        row_index = {label: i for i, label in enumerate(dict.fromkeys(pred))}
        col_index = {label: j for j, label in enumerate(dict.fromkeys(truth))}
        counts = [[0] * len(col_index) for _ in row_index]
        for p, t in zip(pred, truth):
            counts[row_index[p]][col_index[t]] += 1
        return cls(
            counts=tuple(tuple(row) for row in counts),
            row_marginals=tuple(sum(row) for row in counts),
            col_marginals=tuple(sum(col) for col in zip(*counts)),
            n=len(pred),
        )


@dataclass(frozen=True)
class ClusterReport:
    backend_id: str
    avg_adjusted_rand: float
    std_adjusted_rand: float
    avg_adjusted_mutual_info: float
    std_adjusted_mutual_info: float
    cluster_accuracy: float
    repetitions: int
    seed: int


def majority_label(cluster_members: Iterable[AnnotatedSentence]) -> str:
    """Most frequent label across the members; ties go to the smallest name.

    Every member contributes one count per label it carries, so callers must
    inject singleton labels first (no member may be unlabeled).
    """
    counts: dict[str, int] = {}
    empty = True
    for member in cluster_members:
        empty = False
        if not member.labels:
            raise ValueError(f"sentence {member.sentence_id} has no labels")
        for label in member.labels:
            counts[label] = counts.get(label, 0) + 1
    if empty:
        raise ValueError("empty cluster has no majority label")
    return min(counts, key=lambda label: (-counts[label], label))


def cluster_accuracy(assignment: Mapping[str, int], dataset: Dataset) -> float:
    """Percentage of sentences carrying their cluster's majority label.

    Evaluated once against the full multi-label annotation (with singleton
    labels injected); a sentence is correct if the majority label of its
    cluster is among its own labels.
    """
    clusters: dict[int, list[AnnotatedSentence]] = {}
    for sentence in dataset:
        if sentence.sentence_id not in assignment:
            raise ValueError(f"assignment misses sentence {sentence.sentence_id}")
        clusters.setdefault(assignment[sentence.sentence_id], []).append(sentence)
    correct = 0
    for members in clusters.values():
        majority = majority_label(members)
        correct += sum(1 for member in members if majority in member.labels)
    return 100.0 * correct / len(dataset)


def _partitions_equal(table: ContingencyTable) -> bool:
    nonzero = sum(1 for row in table.counts for cell in row if cell)
    return nonzero == len(table.row_marginals) == len(table.col_marginals)


def adjusted_rand(pred: Sequence[Hashable], truth: Sequence[Hashable]) -> float:
    """Adjusted Rand index between two partitions, in [-1, 1].

    Evaluated in exact integer arithmetic; identical partitions score exactly
    1.0 and the expectation under independent random partitions is 0.
    """
    if len(pred) < 2:
        raise ValueError("adjusted Rand index undefined for fewer than 2 items")
    table = ContingencyTable.from_partitions(pred, truth)
    index = sum(comb(cell, 2) for row in table.counts for cell in row)
    sum_a = sum(comb(a, 2) for a in table.row_marginals)
    sum_b = sum(comb(b, 2) for b in table.col_marginals)
    pairs = comb(table.n, 2)
    numerator = 2 * (pairs * index - sum_a * sum_b)
    denominator = pairs * (sum_a + sum_b) - 2 * sum_a * sum_b
    if denominator == 0:
        # both partitions trivial in the same way, hence identical
        return 1.0
    return numerator / denominator


def _entropy(marginals: Sequence[int], n: int) -> float:
    return -sum((m / n) * log(m / n) for m in marginals if m)


def _mutual_information(table: ContingencyTable) -> float:
    mi = 0.0
    for i, row in enumerate(table.counts):
        a = table.row_marginals[i]
        for j, cell in enumerate(row):
            if cell:
                b = table.col_marginals[j]
                mi += (cell / table.n) * log((table.n * cell) / (a * b))
    return mi


def expected_mutual_information(
    row_marginals: Sequence[int], col_marginals: Sequence[int], n: int
) -> float:
    """E[MI] over random contingency tables with fixed marginals.

    The cell counts follow a hypergeometric law; the expectation sums each
    cell's contribution over all feasible values.
    """
    lg = [lgamma(x + 1) for x in range(n + 1)]
    emi = 0.0
    for a in row_marginals:
        for b in col_marginals:
            lo = max(1, a + b - n)
            hi = min(a, b)
            for nij in range(lo, hi + 1):
                log_p = (
                    lg[a]
                    + lg[b]
                    + lg[n - a]
                    + lg[n - b]
                    - lg[n]
                    - lg[nij]
                    - lg[a - nij]
                    - lg[b - nij]
                    - lg[n - a - b + nij]
                )
                emi += (nij / n) * log((n * nij) / (a * b)) * math.exp(log_p)
    return emi


def adjusted_mutual_info(pred: Sequence[Hashable], truth: Sequence[Hashable]) -> float:
    """Adjusted mutual information between two partitions.

    AMI = (MI - E[MI]) / (mean(H(pred), H(truth)) - E[MI]); identical
    partitions score exactly 1.0, and when the denominator degenerates to 0
    with a 0 numerator the score is 0.0 for non-identical partitions.
    """
    if len(pred) < 2:
        raise ValueError("adjusted mutual information undefined for fewer than 2 items")
    table = ContingencyTable.from_partitions(pred, truth)
    if _partitions_equal(table):
        return 1.0
    mi = _mutual_information(table)
    emi = expected_mutual_information(table.row_marginals, table.col_marginals, table.n)
    h_pred = _entropy(table.row_marginals, table.n)
    h_truth = _entropy(table.col_marginals, table.n)
    denominator = 0.5 * (h_pred + h_truth) - emi
    if denominator == 0.0:
        return 0.0
    return (mi - emi) / denominator


def sample_labels(
    dataset: Dataset, repetition_seed: int
) -> list[str]:
    """Draw one label per sentence for a single sampling repetition.

    The draw sequence is fully determined by the seed and the dataset's
    sentence order: a fresh Mersenne Twister seeded with ``repetition_seed``
    visits sentences in order and, only for multi-label sentences, picks an
    index into the lexicographically sorted label list via ``randrange``.
    """
    rng = random.Random(repetition_seed)
    drawn: list[str] = []
    for sentence in dataset:
        if not sentence.labels:
            raise ValueError(
                f"sentence {sentence.sentence_id} has no labels; "
                "inject singleton labels before sampling"
            )
        if len(sentence.labels) == 1:
            drawn.append(next(iter(sentence.labels)))
        else:
            ordered = sorted(sentence.labels)
            drawn.append(ordered[rng.randrange(len(ordered))])
    return drawn


def sampled_cluster_eval(
    assignment: Mapping[str, int],
    dataset: Dataset,
    repetitions: int = 50,
    seed: int = 0,
    backend_id: str = "",
    max_workers: int | None = None,
) -> ClusterReport:
    """ARI/AMI under the repeated one-label-per-sentence sampling protocol.

    Each repetition reduces the multi-label annotation to a flat partition by
    drawing one label per multi-label sentence, then scores the predicted
    partition against it. Means and population standard deviations are taken
    over the repetitions. Repetition ``r`` is seeded with ``seed + r``, so
    serial and parallel execution agree bit for bit. Cluster accuracy is
    attached from the single unsampled computation.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    pred = [assignment[s.sentence_id] for s in dataset]

    def one_repetition(rep: int) -> tuple[float, float]:
        truth = sample_labels(dataset, seed + rep)
        return adjusted_rand(pred, truth), adjusted_mutual_info(pred, truth)

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one_repetition, range(repetitions)))
    else:
        results = [one_repetition(rep) for rep in range(repetitions)]
    ari_values = np.array([ari for ari, _ in results])
    ami_values = np.array([ami for _, ami in results])
    return ClusterReport(
        backend_id=backend_id,
        avg_adjusted_rand=float(ari_values.mean()),
        std_adjusted_rand=float(ari_values.std()),
        avg_adjusted_mutual_info=float(ami_values.mean()),
        std_adjusted_mutual_info=float(ami_values.std()),
        cluster_accuracy=cluster_accuracy(assignment, dataset),
        repetitions=repetitions,
        seed=seed,
    )


_CLUSTER_COLUMNS = [
    "Avg adj. Rand",
    "Std dev",
    "Avg adj. mutual info.",
    "Std dev",
    "Clus. acc.",
]


def render_cluster_table(reports: Sequence[ClusterReport]) -> str:
    """Human-readable table: 2-decimal metrics, 4-decimal stds, integer accuracy."""
    rows = []
    for report in reports:
        rows.append(
            [
                report.backend_id,
                f"{report.avg_adjusted_rand:.2f}",
                f"{report.std_adjusted_rand:.4f}",
                f"{report.avg_adjusted_mutual_info:.2f}",
                f"{report.std_adjusted_mutual_info:.4f}",
                f"{report.cluster_accuracy:.0f}%",
            ]
        )
    header = ["Backend"] + _CLUSTER_COLUMNS
    widths = [
        max(len(header[col]), *(len(row[col]) for row in rows)) if rows else len(header[col])
        for col in range(len(header))
    ]
    lines = [
        "  ".join(header[col].ljust(widths[col]) for col in range(len(header))).rstrip()
    ]
    for row in rows:
        lines.append(
            "  ".join(row[col].ljust(widths[col]) for col in range(len(header))).rstrip()
        )
    return "\n".join(lines) + "\n"


def save_report(report: ClusterReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps({"kind": "cluster_report", **asdict(report)}, indent=2) + "\n",
        encoding="utf-8",
    )


def load_report(path: str | Path) -> ClusterReport:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.pop("kind", None) != "cluster_report":
        raise ValueError(f"{path}: not a cluster report file")
    return ClusterReport(**doc)
