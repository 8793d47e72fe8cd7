/**
 * @fileoverview Presentational DOM builders for the board.
 *
 * Essay sentences are untrusted input. Every string that reaches the page
 * goes through textContent assignment — nothing in this module touches
 * innerHTML or parses markup, so sentence text renders exactly as written.
 */

import type { NeighborPanel } from "./neighbors.js";
import type { PanelLine } from "./panels.js";
import type { BoardState, ClusterColumn, SentenceCard } from "./types.js";

/** Creates an element, assigning untrusted text via textContent only. */
export function el(
  doc: Document,
  tag: string,
  className = "",
  text?: string,
): HTMLElement {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** One sentence card: id line plus the verbatim sentence text. */
export function renderCard(doc: Document, card: SentenceCard): HTMLElement {
  const root = el(doc, "article", "card");
  root.setAttribute("data-sentence-id", card.sentence_id);
  const meta =
    card.labels.length > 0
      ? `${card.sentence_id} · ${card.essay_id} · ${card.labels.join(", ")}`
      : `${card.sentence_id} · ${card.essay_id}`;
  root.appendChild(el(doc, "header", "card-meta", meta));
  root.appendChild(el(doc, "p", "card-text", card.text));
  return root;
}

/** One cluster column with its metadata header and cards. */
export function renderColumn(doc: Document, column: ClusterColumn): HTMLElement {
  const root = el(doc, "section", "column");
  root.setAttribute("data-cluster-id", String(column.cluster_id));
  if (column.color) {
    root.setAttribute("data-color", column.color);
  }
  const header = el(doc, "header", "column-header");
  header.appendChild(
    el(doc, "h2", "column-title", column.name || `cluster ${column.cluster_id}`),
  );
  header.appendChild(
    el(doc, "span", `badge badge-${column.desirability}`, column.desirability),
  );
  if (column.note) {
    header.appendChild(el(doc, "p", "column-note", column.note));
  }
  root.appendChild(header);
  const body = el(doc, "div", "column-cards");
  for (const card of column.sentences) {
    body.appendChild(renderCard(doc, card));
  }
  root.appendChild(body);
  return root;
}

/** The whole board: one column per cluster, in server order. */
export function renderBoard(doc: Document, state: BoardState): HTMLElement {
  const root = el(doc, "div", "board");
  for (const column of state.clusters) {
    root.appendChild(renderColumn(doc, column));
  }
  return root;
}

/** Conflict banner with the server's explanation. */
export function renderConflictBanner(doc: Document, message: string): HTMLElement {
  const root = el(doc, "div", "banner banner-conflict");
  root.appendChild(el(doc, "strong", "", "Edit conflict"));
  root.appendChild(el(doc, "span", "", message));
  root.appendChild(el(doc, "span", "", "The board reloaded to the server state."));
  return root;
}

/** Generic label/value side panel (metrics, overlap). */
export function renderPanelLines(
  doc: Document,
  title: string,
  lines: PanelLine[],
): HTMLElement {
  const root = el(doc, "aside", "panel");
  root.appendChild(el(doc, "h3", "", title));
  const list = el(doc, "dl", "panel-lines");
  for (const line of lines) {
    list.appendChild(el(doc, "dt", "panel-label", line.label));
    list.appendChild(el(doc, "dd", "panel-value", line.value));
  }
  root.appendChild(list);
  return root;
}

/** Nearest-neighbor side panel, one row per payload entry. */
export function renderNeighborPanel(
  doc: Document,
  panel: NeighborPanel,
): HTMLElement {
  const root = el(doc, "aside", "neighbors");
  root.appendChild(
    el(doc, "h3", "", `Similar to ${panel.queryId} (${panel.numCandidates} candidates)`),
  );
  const list = el(doc, "ol", "neighbor-list");
  for (const row of panel.rows) {
    const item = el(doc, "li", row.sharesLabel ? "neighbor shared" : "neighbor");
    item.appendChild(el(doc, "span", "neighbor-id", row.candidateId));
    item.appendChild(el(doc, "span", "neighbor-sim", row.similarityLabel));
    list.appendChild(item);
  }
  root.appendChild(list);
  return root;
}
