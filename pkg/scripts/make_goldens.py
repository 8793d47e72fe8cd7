"""Produce the golden files for the end-to-end pipeline test.

All golden content comes from the independent oracle pipeline
(oracle_pipeline.py), never from the package under test. With --check the
script additionally runs the package's own pipeline and reports any
disagreement (rankings, partition, rendered bytes, aggregate numbers) plus
the distance of every rendered value from its nearest rounding boundary, so
a golden that sits on a knife edge is caught at generation time.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import oracle_pipeline

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "data" / "synthetic_corpus.jsonl"
GOLDEN_DIR = ROOT / "tests" / "golden"

SEED = 7
REPS = 50


def assignment_csv_text(assignment: dict[str, int]) -> str:
    lines = ["sentence_id,cluster"]
    for sid in sorted(assignment):
        lines.append(f"{sid},{assignment[sid]}")
    return "\r\n".join(lines) + "\r\n"


def rounding_margin(value: float, decimals: int) -> float:
    """Distance from the nearest half-step of the rendered precision."""
    scaled = value * (10**decimals)
    return abs(abs(scaled - int(scaled)) - 0.5) / (10**decimals)


def margin_report(result: dict) -> list[tuple[str, float]]:
    checks = []
    ir = result["ir_report"]
    for key in ("avg_first", "avg_med", "avg_mean", "avg_last"):
        checks.append((f"ir.{key}", rounding_margin(ir[key], 0)))
    for key in ("mrr", "map"):
        checks.append((f"ir.{key}", rounding_margin(ir[key], 2)))
    cr = result["cluster_report"]
    for key in ("avg_adjusted_rand", "avg_adjusted_mutual_info"):
        checks.append((f"cluster.{key}", rounding_margin(cr[key], 2)))
    for key in ("std_adjusted_rand", "std_adjusted_mutual_info"):
        checks.append((f"cluster.{key}", rounding_margin(cr[key], 4)))
    checks.append(("cluster.accuracy", rounding_margin(cr["cluster_accuracy"], 0)))
    return checks


def check_against_package(result: dict) -> int:
    """Run the package pipeline and compare both routes; returns #mismatches."""
    sys.path.insert(0, str(ROOT / "src"))
    from argcluster import (
        ir_report,
        load_dataset,
        render_cluster_table,
        render_ir_table,
        retrieve_all,
        sampled_cluster_eval,
        tfidf_matrix,
        true_cluster_count,
        ward_cluster,
        with_singleton_labels,
    )

    failures = 0

    def expect(label: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        print(f"  {'ok ' if ok else 'MISMATCH'} {label} {detail}")
        if not ok:
            failures += 1

    dataset = load_dataset(CORPUS)
    matrix = tfidf_matrix(dataset)
    run = retrieve_all(dataset, matrix)

    oracle_lists = {doc["query_id"]: doc for doc in result["ranked_lists"]}
    expect("query set", {rl.query_id for rl in run.lists} == set(oracle_lists))
    order_same = all(
        [(e.candidate_id, e.relevant) for e in rl.entries]
        == [(c, rel) for c, _s, rel in oracle_lists[rl.query_id]["entries"]]
        for rl in run.lists
    )
    expect("candidate orderings", order_same)

    report = ir_report(run)
    for key in ("avg_first", "avg_med", "avg_mean", "avg_last", "mrr", "map"):
        delta = abs(getattr(report, key) - result["ir_report"][key])
        expect(f"ir.{key}", delta < 1e-9, f"delta={delta:.2e}")
    expect("ir table bytes", render_ir_table([report]) == result["ir_table"])

    k = true_cluster_count(dataset)
    expect("k", k == result["k"], f"{k} vs {result['k']}")
    assignment = ward_cluster(matrix, k)
    expect("partition", assignment.assignment == result["assignment"])
    cost_delta = max(
        (
            abs(step.cost - oracle_cost)
            for step, (_a, _b, oracle_cost) in zip(
                assignment.merge_history, result["merge_history"]
            )
        ),
        default=0.0,
    )
    expect("merge costs", cost_delta < 1e-8, f"max delta={cost_delta:.2e}")

    labeled = with_singleton_labels(dataset)
    cluster_report = sampled_cluster_eval(
        assignment.assignment, labeled, repetitions=REPS, seed=SEED, backend_id="tfidf"
    )
    for key in (
        "avg_adjusted_rand",
        "std_adjusted_rand",
        "avg_adjusted_mutual_info",
        "std_adjusted_mutual_info",
        "cluster_accuracy",
    ):
        delta = abs(getattr(cluster_report, key) - result["cluster_report"][key])
        expect(f"cluster.{key}", delta < 1e-9, f"delta={delta:.2e}")
    expect(
        "cluster table bytes",
        render_cluster_table([cluster_report]) == result["cluster_table"],
    )
    return failures


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--check", action="store_true", help="compare against the package")
    args = parser.parse_args()

    result = oracle_pipeline.run_pipeline(CORPUS, seed=SEED, repetitions=REPS)
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    (GOLDEN_DIR / "stats.txt").write_text(result["stats_text"], encoding="utf-8")
    (GOLDEN_DIR / "ir_table.txt").write_text(result["ir_table"], encoding="utf-8")
    (GOLDEN_DIR / "cluster_table.txt").write_text(result["cluster_table"], encoding="utf-8")
    (GOLDEN_DIR / "report.txt").write_text(result["report_text"], encoding="utf-8")
    (GOLDEN_DIR / "assignment.csv").write_bytes(
        assignment_csv_text(result["assignment"]).encode("utf-8")
    )
    values = {
        "seed": SEED,
        "repetitions": REPS,
        "k": result["k"],
        "ir_report": result["ir_report"],
        "cluster_report": result["cluster_report"],
        "num_skipped": result["num_skipped"],
    }
    (GOLDEN_DIR / "oracle_values.json").write_text(
        json.dumps(values, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote goldens -> {GOLDEN_DIR}")

    print("rounding margins (distance from a .5 boundary at rendered precision):")
    tightest = min(margin_report(result), key=lambda kv: kv[1])
    for label, margin in margin_report(result):
        print(f"  {label}: {margin:.3e}")
    if tightest[1] < 1e-6:
        print(f"WARNING: {tightest[0]} is within 1e-6 of a rounding boundary")

    if args.check:
        print("cross-checking against the package implementation:")
        failures = check_against_package(result)
        if failures:
            raise SystemExit(f"{failures} route disagreements")
        print("all checks passed")


if __name__ == "__main__":
    main()
