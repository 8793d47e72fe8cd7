"""Command-line pipeline: ingest -> embed -> retrieve/cluster -> evaluate -> serve.

Each subcommand writes its module's serialized artifact into the output
directory under a stable name, so later stages can pick up earlier outputs
without extra flags:

    stats         stats.json, stats.txt
    embed         embeddings.jsonl (+ tfidf_model.json for the tfidf backend)
    retrieve      run.jsonl
    eval-ir       ir_report.json, ir_table.txt
    cluster       assignment.json, assignment.csv
    eval-cluster  cluster_report.json, cluster_table.txt
    report        report.txt
    serve         (HTTP service over a project store directory)

A TOML config file can supply any option; explicit flags win. Paths inside
the config file resolve relative to the config file's directory. The env var
ARGCLUSTER_LOG (debug/info/warning/error) sets log verbosity. Exit status:
0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import clustering, cluster_metrics, corpus, embedding, ir_metrics, retrieval
from .corpus import ValidationError

log = logging.getLogger("argcluster")

BACKENDS = ("tfidf", "word-average")
# config keys holding paths; resolved against the config file's directory
_PATH_KEYS = {"dataset", "vectors", "embeddings", "run", "assignment", "out", "store"}


@dataclass(frozen=True)
class PipelineConfig:
    """One resolved set of pipeline options (config file merged with flags)."""

    dataset: str | None = None
    backend: str = "tfidf"
    vectors: str | None = None
    k: int | None = None
    seed: int = 7
    repetitions: int = 50
    normalize: bool = True
    cross_essay_only: bool = False
    out: str = "out"

    def __post_init__(self) -> None:
        parse_backend(self.backend)
        if self.seed < 1:
            raise ValidationError(f"seed must be positive, got {self.seed}")
        if self.repetitions < 1:
            raise ValidationError(
                f"repetitions must be positive, got {self.repetitions}"
            )
        if self.k is not None and self.k < 1:
            raise ValidationError(f"cluster count must be positive, got {self.k}")


def parse_backend(text: str) -> tuple[str, str | None]:
    """Split a backend selector into (kind, payload path)."""
    if text in BACKENDS:
        return text, None
    if text.startswith("precomputed:"):
        path = text.split(":", 1)[1]
        if not path:
            raise ValidationError("precomputed backend needs a path: precomputed:<path>")
        return "precomputed", path
    raise ValidationError(
        f"unknown backend {text!r}; expected tfidf, word-average or precomputed:<path>"
    )


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a TOML options file, resolving its relative paths against it."""
    path = Path(path)
    data = tomllib.loads(path.read_text(encoding="utf-8"))
    base = path.parent
    resolved: dict[str, Any] = {}
    for key, value in data.items():
        if key in _PATH_KEYS and isinstance(value, str) and not Path(value).is_absolute():
            value = str(base / value)
        if (
            key == "backend"
            and isinstance(value, str)
            and value.startswith("precomputed:")
        ):
            inner = value.split(":", 1)[1]
            if inner and not Path(inner).is_absolute():
                value = f"precomputed:{base / inner}"
        resolved[key] = value
    return resolved


def _setting(args: argparse.Namespace, config: dict[str, Any], key: str, default: Any) -> Any:
    """Flag wins over config wins over default; flags left at None defer."""
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _pipeline_config(args: argparse.Namespace, config: dict[str, Any]) -> PipelineConfig:
    return PipelineConfig(
        dataset=_setting(args, config, "dataset", None),
        backend=_setting(args, config, "backend", "tfidf"),
        vectors=_setting(args, config, "vectors", None),
        k=_setting(args, config, "k", None),
        seed=_setting(args, config, "seed", 7),
        repetitions=_setting(args, config, "reps", 50),
        normalize=not _setting(args, config, "no_normalize", False),
        cross_essay_only=_setting(args, config, "cross_essay_only", False),
        out=_setting(args, config, "out", "out"),
    )


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dataset_or_die(cfg: PipelineConfig, fmt: str | None) -> corpus.Dataset:
    if not cfg.dataset:
        raise ValidationError("no dataset given (positional argument or config key)")
    path = Path(cfg.dataset)
    if fmt is None:
        fmt = "tsv" if path.suffix == ".tsv" else "jsonl"
    dataset = corpus.load_dataset(path, format=fmt)
    log.info("loaded %d sentences from %s", len(dataset), path)
    return dataset


def _build_matrix(
    cfg: PipelineConfig, dataset: corpus.Dataset, out: Path
) -> embedding.EmbeddingMatrix:
    kind, payload = parse_backend(cfg.backend)
    if kind == "tfidf":
        model = embedding.fit_tfidf([embedding.embedding_text(s) for s in dataset])
        model_path = out / "tfidf_model.json"
        model_path.write_text(model.to_json(), encoding="utf-8")
        log.info("tfidf vocabulary: %d n-grams -> %s", len(model.vocabulary), model_path)
        return embedding.tfidf_matrix(dataset, model)
    if kind == "word-average":
        if not cfg.vectors:
            raise ValidationError("word-average backend needs --vectors <table>")
        table = embedding.load_word_vectors(cfg.vectors)
        return embedding.average_matrix(dataset, table)
    assert payload is not None
    return embedding.load_precomputed(payload, dataset)


def cmd_stats(args: argparse.Namespace, config: dict[str, Any]) -> int:
    cfg = _pipeline_config(args, config)
    dataset = _dataset_or_die(cfg, args.format)
    stats = corpus.dataset_stats(dataset)
    text = corpus.render_stats(stats)
    out = _out_dir(cfg)
    (out / "stats.json").write_text(
        json.dumps(asdict(stats), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out / "stats.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_embed(args: argparse.Namespace, config: dict[str, Any]) -> int:
    cfg = _pipeline_config(args, config)
    dataset = _dataset_or_die(cfg, args.format)
    out = _out_dir(cfg)
    matrix = _build_matrix(cfg, dataset, out)
    path = out / "embeddings.jsonl"
    embedding.save_matrix(matrix, path)
    empty = sum(1 for row in matrix.rows if row.empty)
    print(
        f"embedded {len(matrix.rows)} sentences with backend {matrix.backend_id} "
        f"(dim {matrix.dim}, {empty} empty) -> {path}"
    )
    return 0


def cmd_retrieve(args: argparse.Namespace, config: dict[str, Any]) -> int:
    cfg = _pipeline_config(args, config)
    dataset = _dataset_or_die(cfg, args.format)
    out = _out_dir(cfg)
    embeddings = _setting(args, config, "embeddings", str(out / "embeddings.jsonl"))
    matrix = embedding.load_matrix(embeddings)
    run = retrieval.retrieve_all(dataset, matrix, cross_essay_only=cfg.cross_essay_only)
    path = out / "run.jsonl"
    retrieval.save_run(run, path)
    print(
        f"ranked {len(run.lists)} queries ({run.num_skipped_queries} without "
        f"relevant candidates skipped) -> {path}"
    )
    return 0


def cmd_eval_ir(args: argparse.Namespace, config: dict[str, Any]) -> int:
    cfg = _pipeline_config(args, config)
    out = _out_dir(cfg)
    run_path = args.run or config.get("run") or str(out / "run.jsonl")
    run = retrieval.load_run(run_path)
    report = ir_metrics.ir_report(run)
    ir_metrics.save_report(report, out / "ir_report.json")
    table = ir_metrics.render_ir_table([report])
    (out / "ir_table.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return 0


def cmd_cluster(args: argparse.Namespace, config: dict[str, Any]) -> int:
    cfg = _pipeline_config(args, config)
    dataset = _dataset_or_die(cfg, args.format)
    out = _out_dir(cfg)
    embeddings = _setting(args, config, "embeddings", str(out / "embeddings.jsonl"))
    matrix = embedding.load_matrix(embeddings)
    k = clustering.true_cluster_count(dataset, override=cfg.k)
    assignment = clustering.ward_cluster(matrix, k, normalize=cfg.normalize)
    clustering.save_assignment(assignment, out / "assignment.json")
    clustering.save_assignment_csv(assignment, out / "assignment.csv")
    print(
        f"clustered {len(assignment.assignment)} sentences into {assignment.k} "
        f"clusters ({assignment.num_empty_vectors} empty vectors) -> "
        f"{out / 'assignment.json'}"
    )
    return 0


def cmd_eval_cluster(args: argparse.Namespace, config: dict[str, Any]) -> int:
    cfg = _pipeline_config(args, config)
    dataset = _dataset_or_die(cfg, args.format)
    out = _out_dir(cfg)
    assignment_path = _setting(args, config, "assignment", str(out / "assignment.json"))
    assignment = clustering.load_assignment(assignment_path)
    labeled = corpus.with_singleton_labels(dataset)
    report = cluster_metrics.sampled_cluster_eval(
        assignment.assignment,
        labeled,
        repetitions=cfg.repetitions,
        seed=cfg.seed,
        backend_id=assignment.backend_id,
        max_workers=args.workers,
    )
    cluster_metrics.save_report(report, out / "cluster_report.json")
    table = cluster_metrics.render_cluster_table([report])
    (out / "cluster_table.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return 0


def cmd_report(args: argparse.Namespace, config: dict[str, Any]) -> int:
    cfg = _pipeline_config(args, config)
    out = _out_dir(cfg)
    ir_paths = args.ir_report or config.get("ir_report") or []
    cluster_paths = args.cluster_report or config.get("cluster_report") or []
    if isinstance(ir_paths, str):
        ir_paths = [ir_paths]
    if isinstance(cluster_paths, str):
        cluster_paths = [cluster_paths]
    if not ir_paths and (out / "ir_report.json").exists():
        ir_paths = [str(out / "ir_report.json")]
    if not cluster_paths and (out / "cluster_report.json").exists():
        cluster_paths = [str(out / "cluster_report.json")]
    if not ir_paths and not cluster_paths:
        raise ValidationError("no report files found; run eval-ir / eval-cluster first")
    sections = []
    if ir_paths:
        reports = [ir_metrics.load_report(p) for p in ir_paths]
        sections.append("Retrieval\n---------\n" + ir_metrics.render_ir_table(reports))
    if cluster_paths:
        reports = [cluster_metrics.load_report(p) for p in cluster_paths]
        sections.append(
            "Clustering\n----------\n" + cluster_metrics.render_cluster_table(reports)
        )
    text = "\n".join(sections)
    (out / "report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_serve(args: argparse.Namespace, config: dict[str, Any]) -> int:
    import uvicorn

    from .server import create_app

    store = _setting(args, config, "store", "projects")
    host = _setting(args, config, "host", "127.0.0.1")
    port = int(_setting(args, config, "port", 8000))
    app = create_app(store)
    log.info("serving project store %s on %s:%d", store, host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="argcluster",
        description="Group equivalent sentences across an essay cohort and "
        "evaluate the groupings.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML options file; flags override it")
    common.add_argument("--out", help="output directory (default: out)")

    dataset_args = argparse.ArgumentParser(add_help=False)
    dataset_args.add_argument("dataset", nargs="?", help="annotated corpus file")
    dataset_args.add_argument(
        "--format", choices=("jsonl", "tsv"), help="corpus format (default: by extension)"
    )

    p = sub.add_parser(
        "stats", parents=[common, dataset_args], help="corpus summary statistics"
    )
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser(
        "embed", parents=[common, dataset_args], help="compute sentence vectors"
    )
    p.add_argument(
        "--backend",
        help="tfidf, word-average or precomputed:<path> (default: tfidf)",
    )
    p.add_argument("--vectors", help="word-vector table for the word-average backend")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser(
        "retrieve",
        parents=[common, dataset_args],
        help="rank candidate sentences per query",
    )
    p.add_argument("--embeddings", help="saved embedding matrix (default: OUT/embeddings.jsonl)")
    p.add_argument(
        "--cross-essay-only",
        action="store_true",
        default=None,
        help="exclude same-essay candidates",
    )
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("eval-ir", parents=[common], help="score a retrieval run")
    p.add_argument("run", nargs="?", help="saved run (default: OUT/run.jsonl)")
    p.set_defaults(func=cmd_eval_ir)

    p = sub.add_parser(
        "cluster", parents=[common, dataset_args], help="group sentences with Ward linkage"
    )
    p.add_argument("--embeddings", help="saved embedding matrix (default: OUT/embeddings.jsonl)")
    p.add_argument("--k", type=int, help="cluster count (default: derived from labels)")
    p.add_argument(
        "--no-normalize",
        action="store_true",
        default=None,
        help="cluster raw vectors instead of L2-normalized ones",
    )
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser(
        "eval-cluster",
        parents=[common, dataset_args],
        help="score an assignment against the annotation",
    )
    p.add_argument("--assignment", help="saved assignment (default: OUT/assignment.json)")
    p.add_argument("--seed", type=int, help="sampling seed (default: 7)")
    p.add_argument("--reps", type=int, help="sampling repetitions (default: 50)")
    p.add_argument("--workers", type=int, help="parallel sampling workers")
    p.set_defaults(func=cmd_eval_cluster)

    p = sub.add_parser("report", parents=[common], help="render the evaluation tables")
    p.add_argument(
        "--ir-report", action="append", help="retrieval report JSON (repeatable)"
    )
    p.add_argument(
        "--cluster-report", action="append", help="clustering report JSON (repeatable)"
    )
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", parents=[common], help="run the review HTTP service")
    p.add_argument("--store", help="project store directory (default: projects)")
    p.add_argument("--host", help="bind address (default: 127.0.0.1)")
    p.add_argument("--port", type=int, help="port (default: 8000)")
    p.set_defaults(func=cmd_serve)

    return parser


def _setup_logging() -> None:
    name = os.environ.get("ARGCLUSTER_LOG", "warning").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = load_config(args.config) if args.config else {}
    try:
        return int(args.func(args, config))
    except (ValidationError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        log.debug("failure detail", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
