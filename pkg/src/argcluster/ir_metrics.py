"""The six retrieval metrics: MRR, MAP and the four rank-percentage averages.

Rank percentages map a 1-based rank affinely onto [0, 100] so that the first
rank scores 0% and the last 100%. All aggregates are unweighted means over
the queries that have at least one relevant candidate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Sequence

from .retrieval import RankedList, RetrievalRun


@dataclass(frozen=True)
class QueryRankSummary:
    query_id: str
    ranks_of_relevant: tuple[int, ...]
    num_candidates: int
    first_pct: float
    median_pct: float
    mean_pct: float
    last_pct: float
    reciprocal_rank: float
    average_precision: float


@dataclass(frozen=True)
class IrReport:
    backend_id: str
    avg_first: float
    avg_med: float
    avg_mean: float
    avg_last: float
    mrr: float
    map: float
    num_queries: int
    num_skipped: int


def _percent(rank: float, num_candidates: int) -> float:
    if num_candidates == 1:
        return 0.0
    return 100.0 * (rank - 1) / (num_candidates - 1)


def rank_percent(rank: int, num_candidates: int) -> float:
    """Affine rank-to-percentage: rank 1 -> 0%, rank N -> 100%.

    A single-candidate list is degenerate; its only rank maps to 0%.
    """
    if not 1 <= rank <= num_candidates:
        raise ValueError(f"rank {rank} outside 1..{num_candidates}")
    return _percent(rank, num_candidates)


def reciprocal_rank(ranks_of_relevant: Sequence[int]) -> float:
    """1 over the rank of the first relevant item."""
    if not ranks_of_relevant:
        raise ValueError("no relevant ranks")
    return 1.0 / min(ranks_of_relevant)


def average_precision(relevance_flags: Sequence[bool]) -> float:
    """Mean, over relevant positions r, of (relevant count at ranks <= r) / r."""
    precisions = []
    seen_relevant = 0
    for position, flag in enumerate(relevance_flags, start=1):
        if flag:
            seen_relevant += 1
            precisions.append(seen_relevant / position)
    if not precisions:
        raise ValueError("no relevant items in ranking")
    return sum(precisions) / len(precisions)


def _median_rank(ranks: Sequence[int]) -> float:
    mid = len(ranks) // 2
    if len(ranks) % 2 == 1:
        return float(ranks[mid])
    return (ranks[mid - 1] + ranks[mid]) / 2.0


def summarize_query(ranked: RankedList) -> QueryRankSummary:
    """Where the relevant items sit in one ranking: first/median/mean/last, RR, AP."""
    ranks = tuple(
        position
        for position, entry in enumerate(ranked.entries, start=1)
        if entry.relevant
    )
    if not ranks:
        raise ValueError(f"query {ranked.query_id} has no relevant candidates")
    n = ranked.num_candidates
    mean_rank = sum(ranks) / len(ranks)
    # rank_percent is affine, so converting the median/mean rank equals the
    # median/mean of converted ranks; conversion happens after aggregation.
    return QueryRankSummary(
        query_id=ranked.query_id,
        ranks_of_relevant=ranks,
        num_candidates=n,
        first_pct=rank_percent(ranks[0], n),
        median_pct=_percent(_median_rank(ranks), n),
        mean_pct=_percent(mean_rank, n),
        last_pct=rank_percent(ranks[-1], n),
        reciprocal_rank=reciprocal_rank(ranks),
        average_precision=average_precision([e.relevant for e in ranked.entries]),
    )


def ir_report(run: RetrievalRun) -> IrReport:
    """Unweighted means of the per-query summaries over the whole run."""
    if not run.lists:
        raise ValueError("no evaluable queries")
    summaries = [summarize_query(ranked) for ranked in run.lists]
    count = len(summaries)
    return IrReport(
        backend_id=run.backend_id,
        avg_first=sum(s.first_pct for s in summaries) / count,
        avg_med=sum(s.median_pct for s in summaries) / count,
        avg_mean=sum(s.mean_pct for s in summaries) / count,
        avg_last=sum(s.last_pct for s in summaries) / count,
        mrr=sum(s.reciprocal_rank for s in summaries) / count,
        map=sum(s.average_precision for s in summaries) / count,
        num_queries=count,
        num_skipped=run.num_skipped_queries,
    )


_IR_COLUMNS = ["Avg First", "Avg Med", "Avg Mean", "Avg Last", "MRR", "MAP"]


def render_ir_table(reports: Sequence[IrReport]) -> str:
    """Human-readable table: integer percentages, two-decimal MRR/MAP."""
    rows = []
    for report in reports:
        rows.append(
            [
                report.backend_id,
                f"{report.avg_first:.0f}%",
                f"{report.avg_med:.0f}%",
                f"{report.avg_mean:.0f}%",
                f"{report.avg_last:.0f}%",
                f"{report.mrr:.2f}",
                f"{report.map:.2f}",
            ]
        )
    header = ["Backend"] + _IR_COLUMNS
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


def save_report(report: IrReport, path: str | Path) -> None:
    """Full-precision machine report (JSON)."""
    Path(path).write_text(
        json.dumps({"kind": "ir_report", **asdict(report)}, indent=2) + "\n",
        encoding="utf-8",
    )


def load_report(path: str | Path) -> IrReport:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.pop("kind", None) != "ir_report":
        raise ValueError(f"{path}: not an IR report file")
    return IrReport(**doc)
