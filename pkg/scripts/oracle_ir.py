"""Independent retrieval-metric computation, straight from the definitions.

Pure stdlib, no imports from the package under test: rank statistics are
built with Fraction arithmetic and converted to float at the end, so this
script is a second route to the same numbers. Reads a saved retrieval run
(JSONL) and prints the aggregate report as JSON.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path


def pct(rank: Fraction | int, num_candidates: int) -> Fraction:
    """Affine rank-to-percent: rank 1 -> 0, rank N -> 100; N=1 -> 0."""
    if num_candidates == 1:
        return Fraction(0)
    return Fraction(100) * (Fraction(rank) - 1) / (num_candidates - 1)


def median(values: list[int]) -> Fraction:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2 == 1:
        return Fraction(ordered[mid])
    return Fraction(ordered[mid - 1] + ordered[mid], 2)


def query_metrics(relevant_ranks: list[int], num_candidates: int) -> dict[str, Fraction]:
    """Six per-query statistics from the 1-based ranks of relevant candidates."""
    assert relevant_ranks, "query must have at least one relevant candidate"
    ranks = sorted(relevant_ranks)
    first = ranks[0]
    # average precision: precision at each relevant rank, averaged
    ap = Fraction(0)
    for hit_index, rank in enumerate(ranks, start=1):
        ap += Fraction(hit_index, rank)
    ap /= len(ranks)
    return {
        "first_pct": pct(first, num_candidates),
        "median_pct": pct(median(ranks), num_candidates),
        "mean_pct": pct(Fraction(sum(ranks), len(ranks)), num_candidates),
        "last_pct": pct(ranks[-1], num_candidates),
        "reciprocal_rank": Fraction(1, first),
        "average_precision": ap,
    }


def aggregate(per_query: list[dict[str, Fraction]]) -> dict[str, float]:
    """Unweighted mean over queries, exact until the final float conversion."""
    assert per_query, "nothing to aggregate"
    keys = per_query[0].keys()
    out = {}
    for key in keys:
        total = sum((q[key] for q in per_query), Fraction(0))
        out[key] = float(total / len(per_query))
    return out


def report_from_run_file(path: str | Path) -> dict[str, float | int | str]:
    """Recompute the aggregate report for a saved retrieval run."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = json.loads(lines[0])
    assert header.get("kind") == "retrieval_run", "not a retrieval run file"
    per_query = []
    for line in lines[1:]:
        if not line.strip():
            continue
        doc = json.loads(line)
        ranks = [
            position
            for position, (_cand, _sim, relevant) in enumerate(doc["entries"], start=1)
            if relevant
        ]
        per_query.append(query_metrics(ranks, doc["num_candidates"]))
    agg = aggregate(per_query)
    return {
        "backend_id": header["backend_id"],
        "avg_first": agg["first_pct"],
        "avg_med": agg["median_pct"],
        "avg_mean": agg["mean_pct"],
        "avg_last": agg["last_pct"],
        "mrr": agg["reciprocal_rank"],
        "map": agg["average_precision"],
        "num_queries": len(per_query),
        "num_skipped": header.get("num_skipped_queries", 0),
    }


def main() -> None:
    if len(sys.argv) != 2:
        print("usage: oracle_ir.py <run.jsonl>", file=sys.stderr)
        raise SystemExit(2)
    print(json.dumps(report_from_run_file(sys.argv[1]), indent=2))


if __name__ == "__main__":
    main()
