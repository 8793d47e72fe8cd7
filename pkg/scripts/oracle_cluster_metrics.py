"""Independent partition-comparison metrics, straight from the definitions.

Pure stdlib, no imports from the package under test. The adjusted Rand index
is computed by literally counting agreeing and disagreeing item pairs; the
adjusted mutual information evaluates the hypergeometric expectation with
Fraction probabilities. Also provides an exhaustive set-partition generator
for small n.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Hashable, Iterator, Sequence


def adjusted_rand_pairs(pred: Sequence[Hashable], truth: Sequence[Hashable]) -> float:
    """ARI from the four pair-agreement counts a, b, c, d.

    a: together in both partitions; b: together only in pred; c: together
    only in truth; d: separate in both. ARI = 2(ad - bc) /
    ((a+b)(b+d) + (a+c)(c+d)), with the degenerate 0/0 case scoring 1.
    """
    n = len(pred)
    assert n == len(truth) and n >= 2
    a = b = c = d = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_pred = pred[i] == pred[j]
            same_truth = truth[i] == truth[j]
            if same_pred and same_truth:
                a += 1
            elif same_pred:
                b += 1
            elif same_truth:
                c += 1
            else:
                d += 1
    numerator = 2 * (a * d - b * c)
    denominator = (a + b) * (b + d) + (a + c) * (c + d)
    if denominator == 0:
        return 1.0
    return float(Fraction(numerator, denominator))


def contingency(
    pred: Sequence[Hashable], truth: Sequence[Hashable]
) -> tuple[list[list[int]], list[int], list[int], int]:
    pred_ids = list(dict.fromkeys(pred))
    truth_ids = list(dict.fromkeys(truth))
    counts = [[0] * len(truth_ids) for _ in pred_ids]
    pred_index = {p: i for i, p in enumerate(pred_ids)}
    truth_index = {t: j for j, t in enumerate(truth_ids)}
    for p, t in zip(pred, truth):
        counts[pred_index[p]][truth_index[t]] += 1
    row = [sum(r) for r in counts]
    col = [sum(counts[i][j] for i in range(len(pred_ids))) for j in range(len(truth_ids))]
    return counts, row, col, len(pred)


def mutual_information(counts: list[list[int]], row: list[int], col: list[int], n: int) -> float:
    mi = 0.0
    for i, r in enumerate(counts):
        for j, nij in enumerate(r):
            if nij:
                mi += (nij / n) * math.log(n * nij / (row[i] * col[j]))
    return mi


def entropy(marginals: Sequence[int], n: int) -> float:
    return -sum((m / n) * math.log(m / n) for m in marginals if m)


def expected_mutual_information(row: Sequence[int], col: Sequence[int], n: int) -> float:
    """E[MI] over random tables with fixed marginals (hypergeometric model).

    P(nij | a, b, n) is evaluated exactly with Fractions of binomials; only
    the log factor uses floats.
    """
    emi = 0.0
    for a in row:
        for b in col:
            lo = max(1, a + b - n)
            hi = min(a, b)
            for nij in range(lo, hi + 1):
                prob = Fraction(
                    math.comb(b, nij) * math.comb(n - b, a - nij), math.comb(n, a)
                )
                emi += (nij / n) * math.log(n * nij / (a * b)) * float(prob)
    return emi


def partitions_identical(pred: Sequence[Hashable], truth: Sequence[Hashable]) -> bool:
    """True when both label sequences induce the same grouping of items."""
    by_pred: dict[Hashable, list[int]] = {}
    by_truth: dict[Hashable, list[int]] = {}
    for idx, (p, t) in enumerate(zip(pred, truth)):
        by_pred.setdefault(p, []).append(idx)
        by_truth.setdefault(t, []).append(idx)
    groups_pred = {frozenset(v) for v in by_pred.values()}
    groups_truth = {frozenset(v) for v in by_truth.values()}
    return groups_pred == groups_truth


def adjusted_mutual_info_direct(
    pred: Sequence[Hashable], truth: Sequence[Hashable]
) -> float:
    """AMI = (MI - E[MI]) / (mean(H_pred, H_truth) - E[MI]), natural logs."""
    assert len(pred) == len(truth) and len(pred) >= 2
    if partitions_identical(pred, truth):
        return 1.0
    counts, row, col, n = contingency(pred, truth)
    mi = mutual_information(counts, row, col, n)
    emi = expected_mutual_information(row, col, n)
    denominator = 0.5 * (entropy(row, n) + entropy(col, n)) - emi
    if denominator == 0.0:
        return 0.0
    return (mi - emi) / denominator


def all_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Every partition of n items as a restricted growth string.

    Item 0 always gets block 0; item i gets any block up to one past the
    current maximum. Yields each set partition exactly once.
    """
    labels = [0] * n

    def grow(i: int, max_used: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            yield tuple(labels)
            return
        for block in range(max_used + 2):
            labels[i] = block
            yield from grow(i + 1, max(max_used, block))

    yield from grow(1, 0) if n > 1 else iter([(0,) * n])
