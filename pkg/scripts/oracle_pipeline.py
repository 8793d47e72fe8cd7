"""Independent end-to-end pipeline used to produce the golden files.

Pure stdlib, no imports from the package under test. Every stage is a second
implementation of the documented contracts: character n-gram TF-IDF with
sparse dicts, cosine ranking, retrieval metrics (via oracle_ir), Ward
clustering that recomputes merge costs from cluster centroids at every step
(no recurrence shortcuts), the label-sampling evaluation protocol, and the
plain-text table layouts.
"""

from __future__ import annotations

import json
import math
import random
import unicodedata
from collections import Counter
from pathlib import Path
from typing import Sequence

import oracle_cluster_metrics as ocm
import oracle_ir

SINGLETON_PREFIX = "__singleton__"


# ---------------------------------------------------------------- corpus

def load_corpus(path: str | Path) -> list[dict]:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rows.append(json.loads(line))
    return rows


def stats_text(rows: list[dict]) -> str:
    histogram = Counter(len(r.get("labels", [])) for r in rows)
    occurrence = Counter(lbl for r in rows for lbl in r.get("labels", []))
    total = sum(len(r.get("labels", [])) for r in rows)
    lines = [
        f"Essays:              {len({r['essay_id'] for r in rows})}",
        f"Sentences:           {len(rows)}",
        f"Distinct labels:     {len(occurrence)}",
        f"Avg labels/sentence: {total / len(rows):.2f}",
        "",
        "Labels per sentence:",
    ]
    for count in sorted(histogram):
        lines.append(f"  {count}: {histogram[count]}")
    lines.append("")
    lines.append("Label occurrence:")
    for label in sorted(occurrence):
        lines.append(f"  {label}: {occurrence[label]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- embedding

def tokenize_text(text: str) -> list[str]:
    tokens = []
    for raw in text.split():
        token = raw.lower()
        chars = list(token)
        while chars and unicodedata.category(chars[0]).startswith("P"):
            chars.pop(0)
        while chars and unicodedata.category(chars[-1]).startswith("P"):
            chars.pop()
        if chars:
            tokens.append("".join(chars))
    return tokens


def sentence_grams(text: str, n_min: int = 2, n_max: int = 5) -> Counter[str]:
    grams: Counter[str] = Counter()
    for token in tokenize_text(text):
        for n in range(n_min, n_max + 1):
            for start in range(len(token) - n + 1):
                grams[token[start : start + n]] += 1
    return grams


def fit_idf(texts: Sequence[str]) -> dict[str, float]:
    df: Counter[str] = Counter()
    for text in texts:
        df.update(set(sentence_grams(text)))
    n_docs = len(texts)
    return {g: math.log((1 + n_docs) / (1 + df[g])) + 1.0 for g in sorted(df)}


def embed(text: str, idf: dict[str, float]) -> dict[str, float]:
    weights = {
        g: count * idf[g] for g, count in sentence_grams(text).items() if g in idf
    }
    norm = math.sqrt(sum(w * w for w in weights.values()))
    if norm == 0.0:
        return {}
    return {g: w / norm for g, w in weights.items()}


def cosine(u: dict[str, float], v: dict[str, float]) -> float:
    if not u or not v:
        return 0.0
    if len(v) < len(u):
        u, v = v, u
    dot = sum(w * v[g] for g, w in u.items() if g in v)
    nu = math.sqrt(sum(w * w for w in u.values()))
    nv = math.sqrt(sum(w * w for w in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


# ---------------------------------------------------------------- retrieval

def rank_all(
    rows: list[dict], vectors: dict[str, dict[str, float]]
) -> tuple[list[dict], int]:
    """One ranked candidate list per query that has a relevant candidate."""
    lists = []
    skipped = 0
    for query in rows:
        qid = query["sentence_id"]
        qlabels = set(query.get("labels", []))
        scored = []
        for cand in rows:
            cid = cand["sentence_id"]
            if cid == qid:
                continue
            sim = cosine(vectors[qid], vectors[cid])
            relevant = bool(qlabels & set(cand.get("labels", [])))
            scored.append((cid, sim, relevant))
        scored.sort(key=lambda e: (-e[1], e[0]))
        if any(rel for _, _, rel in scored):
            lists.append(
                {"query_id": qid, "entries": scored, "num_candidates": len(scored)}
            )
        else:
            skipped += 1
    return lists, skipped


def ir_aggregates(lists: list[dict], backend_id: str, skipped: int) -> dict:
    per_query = []
    for doc in lists:
        ranks = [
            pos for pos, (_c, _s, rel) in enumerate(doc["entries"], start=1) if rel
        ]
        per_query.append(oracle_ir.query_metrics(ranks, doc["num_candidates"]))
    agg = oracle_ir.aggregate(per_query)
    return {
        "backend_id": backend_id,
        "avg_first": agg["first_pct"],
        "avg_med": agg["median_pct"],
        "avg_mean": agg["mean_pct"],
        "avg_last": agg["last_pct"],
        "mrr": agg["reciprocal_rank"],
        "map": agg["average_precision"],
        "num_queries": len(per_query),
        "num_skipped": skipped,
    }


# ---------------------------------------------------------------- clustering

def ward_from_scratch(
    vectors: dict[str, dict[str, float]], k: int
) -> tuple[dict[str, int], list[tuple[str, str, float]]]:
    """Ward agglomeration recomputing every cost from cluster centroids.

    Clusters are keyed by their smallest member id; each step merges the pair
    with minimal (size_a*size_b/(size_a+size_b)) * ||centroid_a-centroid_b||^2,
    ties broken by the lexicographically smallest (min_id_a, min_id_b). Final
    cluster indices follow ascending smallest member id.
    """

    def centroid(summed: dict[str, float], size: int) -> dict[str, float]:
        return {g: w / size for g, w in summed.items()}

    def sq_dist(ca: dict[str, float], cb: dict[str, float]) -> float:
        total = 0.0
        for g in sorted(set(ca) | set(cb)):
            diff = ca.get(g, 0.0) - cb.get(g, 0.0)
            total += diff * diff
        return total

    clusters: dict[str, dict] = {}
    for sid, vec in vectors.items():
        clusters[sid] = {"members": [sid], "sum": dict(vec), "size": 1}
    history: list[tuple[str, str, float]] = []
    while len(clusters) > k:
        best = None
        ids = sorted(clusters)
        for i, ka in enumerate(ids):
            for kb in ids[i + 1 :]:
                a, b = clusters[ka], clusters[kb]
                cost = (
                    a["size"] * b["size"] / (a["size"] + b["size"])
                ) * sq_dist(centroid(a["sum"], a["size"]), centroid(b["sum"], b["size"]))
                key = (cost, ka, kb)
                if best is None or key < best:
                    best = key
        assert best is not None
        cost, ka, kb = best
        a, b = clusters[ka], clusters[kb]
        merged_sum = dict(a["sum"])
        for g, w in b["sum"].items():
            merged_sum[g] = merged_sum.get(g, 0.0) + w
        clusters[ka] = {
            "members": a["members"] + b["members"],
            "sum": merged_sum,
            "size": a["size"] + b["size"],
        }
        del clusters[kb]
        history.append((ka, kb, cost))
    assignment = {}
    for index, key in enumerate(sorted(clusters)):
        for sid in clusters[key]["members"]:
            assignment[sid] = index
    return assignment, history


# ---------------------------------------------------------------- evaluation

def inject_singletons(rows: list[dict]) -> list[dict]:
    out = []
    for r in rows:
        labels = list(r.get("labels", []))
        if not labels:
            labels = [f"{SINGLETON_PREFIX}{r['sentence_id']}"]
        out.append({**r, "labels": labels})
    return out


def sample_once(rows: list[dict], repetition_seed: int) -> list[str]:
    rng = random.Random(repetition_seed)
    drawn = []
    for r in rows:
        labels = sorted(r["labels"])
        if len(labels) == 1:
            drawn.append(labels[0])
        else:
            drawn.append(labels[rng.randrange(len(labels))])
    return drawn


def majority_accuracy(rows: list[dict], assignment: dict[str, int]) -> float:
    clusters: dict[int, list[dict]] = {}
    for r in rows:
        clusters.setdefault(assignment[r["sentence_id"]], []).append(r)
    correct = 0
    for members in clusters.values():
        counts: Counter[str] = Counter()
        for m in members:
            counts.update(m["labels"])
        majority = min(counts, key=lambda lbl: (-counts[lbl], lbl))
        correct += sum(1 for m in members if majority in m["labels"])
    return 100.0 * correct / len(rows)


def sampled_eval(
    rows: list[dict],
    assignment: dict[str, int],
    repetitions: int,
    seed: int,
    backend_id: str,
) -> dict:
    labeled = inject_singletons(rows)
    pred = [assignment[r["sentence_id"]] for r in labeled]
    aris, amis = [], []
    for rep in range(repetitions):
        truth = sample_once(labeled, seed + rep)
        aris.append(ocm.adjusted_rand_pairs(pred, truth))
        amis.append(ocm.adjusted_mutual_info_direct(pred, truth))

    def mean(xs: list[float]) -> float:
        return sum(xs) / len(xs)

    def pstd(xs: list[float]) -> float:
        m = mean(xs)
        return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))

    return {
        "backend_id": backend_id,
        "avg_adjusted_rand": mean(aris),
        "std_adjusted_rand": pstd(aris),
        "avg_adjusted_mutual_info": mean(amis),
        "std_adjusted_mutual_info": pstd(amis),
        "cluster_accuracy": majority_accuracy(labeled, assignment),
        "repetitions": repetitions,
        "seed": seed,
    }


# ---------------------------------------------------------------- rendering

def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(header[col]), *(len(row[col]) for row in rows)) if rows else len(header[col])
        for col in range(len(header))
    ]
    lines = ["  ".join(header[c].ljust(widths[c]) for c in range(len(header))).rstrip()]
    for row in rows:
        lines.append("  ".join(row[c].ljust(widths[c]) for c in range(len(header))).rstrip())
    return "\n".join(lines) + "\n"


def ir_table_text(reports: list[dict]) -> str:
    header = ["Backend", "Avg First", "Avg Med", "Avg Mean", "Avg Last", "MRR", "MAP"]
    rows = [
        [
            r["backend_id"],
            f"{r['avg_first']:.0f}%",
            f"{r['avg_med']:.0f}%",
            f"{r['avg_mean']:.0f}%",
            f"{r['avg_last']:.0f}%",
            f"{r['mrr']:.2f}",
            f"{r['map']:.2f}",
        ]
        for r in reports
    ]
    return _table(header, rows)


def cluster_table_text(reports: list[dict]) -> str:
    header = [
        "Backend",
        "Avg adj. Rand",
        "Std dev",
        "Avg adj. mutual info.",
        "Std dev",
        "Clus. acc.",
    ]
    rows = [
        [
            r["backend_id"],
            f"{r['avg_adjusted_rand']:.2f}",
            f"{r['std_adjusted_rand']:.4f}",
            f"{r['avg_adjusted_mutual_info']:.2f}",
            f"{r['std_adjusted_mutual_info']:.4f}",
            f"{r['cluster_accuracy']:.0f}%",
        ]
        for r in reports
    ]
    return _table(header, rows)


def report_text(ir_reports: list[dict], cluster_reports: list[dict]) -> str:
    sections = []
    if ir_reports:
        sections.append("Retrieval\n---------\n" + ir_table_text(ir_reports))
    if cluster_reports:
        sections.append("Clustering\n----------\n" + cluster_table_text(cluster_reports))
    return "\n".join(sections)


# ---------------------------------------------------------------- driver

def run_pipeline(corpus_path: str | Path, seed: int = 7, repetitions: int = 50) -> dict:
    """Full oracle pass over a corpus; returns every artifact in memory."""
    rows = load_corpus(corpus_path)
    idf = fit_idf([r.get("lemma_text") or r["text"] for r in rows])
    vectors = {
        r["sentence_id"]: embed(r.get("lemma_text") or r["text"], idf) for r in rows
    }
    lists, skipped = rank_all(rows, vectors)
    ir = ir_aggregates(lists, "tfidf", skipped)

    real_labels = {lbl for r in rows for lbl in r.get("labels", [])}
    unlabeled = sum(1 for r in rows if not r.get("labels"))
    k = len(real_labels) + unlabeled
    assignment, history = ward_from_scratch(vectors, k)
    cluster_report = sampled_eval(rows, assignment, repetitions, seed, "tfidf")

    return {
        "stats_text": stats_text(rows),
        "ir_report": ir,
        "ir_table": ir_table_text([ir]),
        "assignment": assignment,
        "merge_history": history,
        "cluster_report": cluster_report,
        "cluster_table": cluster_table_text([cluster_report]),
        "report_text": report_text([ir], [cluster_report]),
        "ranked_lists": lists,
        "num_skipped": skipped,
        "k": k,
    }


def main() -> None:
    import argparse

    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("corpus")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--reps", type=int, default=50)
    args = parser.parse_args()
    result = run_pipeline(args.corpus, seed=args.seed, repetitions=args.reps)
    print(result["stats_text"])
    print(result["report_text"])


if __name__ == "__main__":
    main()
