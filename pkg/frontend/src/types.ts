/**
 * @fileoverview JSON payload shapes of the review service HTTP API.
 *
 * These mirror the documents the service emits; the board never invents
 * fields of its own on top of them.
 */

/** How much the reviewer wants a cluster to appear in an essay. */
export type Desirability = "desired" | "neutral" | "undesired";

/** One sentence card as served inside a cluster. */
export interface SentenceCard {
  sentence_id: string;
  essay_id: string;
  text: string;
  labels: string[];
}

/** One cluster column with its reviewer-editable metadata. */
export interface ClusterColumn {
  cluster_id: number;
  name: string;
  color: string;
  desirability: Desirability;
  note: string;
  sentences: SentenceCard[];
}

/** Full project state document from GET /projects/{id}/state. */
export interface BoardState {
  project_id: string;
  version: number;
  backend_id: string;
  num_edits: number;
  /** Id the next create_cluster edit will be assigned by the server. */
  next_cluster_id: number;
  reference_essay_ids: string[];
  clusters: ClusterColumn[];
}

/** Edit kinds accepted by POST /projects/{id}/edits. */
export type EditKind =
  | "move_sentence"
  | "create_cluster"
  | "delete_cluster"
  | "set_meta";

/** A single edit before it carries a version expectation. */
export interface EditBody {
  kind: EditKind;
  payload: Record<string, unknown>;
}

/** The wire form of an edit request. */
export interface EditRequestBody extends EditBody {
  expected_version: number;
}

/** Acknowledgement returned for an accepted edit. */
export interface EditAck {
  edit_id: number;
  kind: EditKind;
  version: number;
}

/** One row of GET /projects. */
export interface ProjectRow {
  project_id: string;
  version: number;
  num_clusters: number;
  num_sentences: number;
  locked: boolean;
}

/** Payload of GET /projects/{id}/similar/{sentence_id}. */
export interface SimilarPayload {
  query_id: string;
  num_candidates: number;
  /** [candidate_id, similarity, shares_a_label_with_query] per entry. */
  entries: [string, number, boolean][];
}

/** Payload of GET /projects/{id}/metrics. */
export interface MetricsPayload {
  num_clusters: number;
  num_sentences: number;
  num_edits: number;
  version: number;
  /** Percentage agreement with reference labels; absent without labels. */
  cluster_accuracy?: number;
}

/** Payload of GET /projects/{id}/overlap/{essay_id}. */
export interface OverlapPayload {
  essay_id: string;
  shared_clusters: number;
  reference_clusters: number;
  coverage: number;
}
