/**
 * @fileoverview View models for the metrics and essay-overlap side panels.
 *
 * Like the neighbor panel, these are direct projections of service payloads:
 * every number shown comes from the response, never from client arithmetic.
 */

import type { MetricsPayload, OverlapPayload } from "./types.js";

export interface PanelLine {
  label: string;
  value: string;
}

/** Rows for the project metrics panel, in display order. */
export function metricsLines(payload: MetricsPayload): PanelLine[] {
  const lines: PanelLine[] = [
    { label: "clusters", value: String(payload.num_clusters) },
    { label: "sentences", value: String(payload.num_sentences) },
    { label: "edits", value: String(payload.num_edits) },
    { label: "version", value: String(payload.version) },
  ];
  if (payload.cluster_accuracy !== undefined) {
    lines.push({
      label: "label agreement",
      value: `${payload.cluster_accuracy.toFixed(1)}%`,
    });
  }
  return lines;
}

/** Rows for one essay's reference-overlap readout. */
export function overlapLines(payload: OverlapPayload): PanelLine[] {
  return [
    { label: "essay", value: payload.essay_id },
    {
      label: "shared clusters",
      value: `${payload.shared_clusters} of ${payload.reference_clusters}`,
    },
    { label: "coverage", value: `${(payload.coverage * 100).toFixed(0)}%` },
  ];
}
