"""Grouping semantically equivalent sentences across student essay cohorts.

The pipeline: load an annotated corpus, embed each sentence with one of three
interchangeable backends, rank candidate sentences by cosine similarity or
group them with Ward linkage, score the results with retrieval and clustering
metric suites, and review the groupings interactively over an HTTP service.
"""

from __future__ import annotations

from .corpus import (
    AnnotatedSentence,
    Dataset,
    DatasetStats,
    Essay,
    ValidationError,
    dataset_stats,
    load_dataset,
    save_dataset,
    segment_text,
    with_singleton_labels,
)
from .embedding import (
    EmbeddingMatrix,
    SentenceVector,
    TfidfModel,
    WordVectorTable,
    average_matrix,
    cosine_similarity,
    fit_tfidf,
    load_matrix,
    load_precomputed,
    load_word_vectors,
    save_matrix,
    tfidf_embed,
    tfidf_matrix,
)
from .retrieval import (
    RankedEntry,
    RankedList,
    RetrievalRun,
    load_run,
    rank_candidates,
    retrieve_all,
    save_run,
)
from .ir_metrics import IrReport, ir_report, render_ir_table
from .clustering import (
    ClusterAssignment,
    load_assignment,
    save_assignment,
    true_cluster_count,
    ward_cluster,
)
from .cluster_metrics import (
    ClusterReport,
    adjusted_mutual_info,
    adjusted_rand,
    cluster_accuracy,
    render_cluster_table,
    sampled_cluster_eval,
)
from .review import (
    Edit,
    OverlapScore,
    ProjectStore,
    ReviewProject,
    create_project,
    load_project,
    save_project,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedSentence",
    "ClusterAssignment",
    "ClusterReport",
    "Dataset",
    "DatasetStats",
    "Edit",
    "EmbeddingMatrix",
    "Essay",
    "IrReport",
    "OverlapScore",
    "ProjectStore",
    "RankedEntry",
    "RankedList",
    "RetrievalRun",
    "ReviewProject",
    "SentenceVector",
    "TfidfModel",
    "ValidationError",
    "WordVectorTable",
    "adjusted_mutual_info",
    "adjusted_rand",
    "average_matrix",
    "cluster_accuracy",
    "cosine_similarity",
    "create_project",
    "dataset_stats",
    "fit_tfidf",
    "ir_report",
    "load_assignment",
    "load_dataset",
    "load_matrix",
    "load_precomputed",
    "load_project",
    "load_run",
    "load_word_vectors",
    "rank_candidates",
    "render_cluster_table",
    "render_ir_table",
    "retrieve_all",
    "sampled_cluster_eval",
    "save_assignment",
    "save_dataset",
    "save_matrix",
    "save_project",
    "save_run",
    "segment_text",
    "tfidf_embed",
    "tfidf_matrix",
    "true_cluster_count",
    "ward_cluster",
    "with_singleton_labels",
]
