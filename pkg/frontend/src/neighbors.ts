/**
 * @fileoverview View model for the nearest-neighbor side panel.
 *
 * The panel is a faithful projection of the service's similarity payload:
 * one row per entry, same order, no re-ranking or filtering on the client.
 */

import type { SimilarPayload } from "./types.js";

export interface NeighborRow {
  candidateId: string;
  similarity: number;
  /** Similarity formatted for display, three decimals. */
  similarityLabel: string;
  /** Whether the candidate shares a reference label with the query. */
  sharesLabel: boolean;
}

export interface NeighborPanel {
  queryId: string;
  numCandidates: number;
  rows: NeighborRow[];
}

/** Builds the panel model from the /similar payload, entry for entry. */
export function neighborPanel(payload: SimilarPayload): NeighborPanel {
  return {
    queryId: payload.query_id,
    numCandidates: payload.num_candidates,
    rows: payload.entries.map(([candidateId, similarity, sharesLabel]) => ({
      candidateId,
      similarity,
      similarityLabel: similarity.toFixed(3),
      sharesLabel,
    })),
  };
}
