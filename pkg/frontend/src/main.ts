/**
 * @fileoverview Browser entry point: wires the board controller to the DOM.
 *
 * The page is served next to the review service (or pointed at it with
 * `?api=http://host:port`) and talks to it exclusively over HTTP.
 */

import { ApiClient, fetchTransport } from "./api.js";
import { BoardController } from "./board.js";
import { neighborPanel } from "./neighbors.js";
import { metricsLines, overlapLines } from "./panels.js";
import {
  el,
  renderBoard,
  renderConflictBanner,
  renderNeighborPanel,
  renderPanelLines,
} from "./render.js";
import type { Desirability, SimilarPayload } from "./types.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? window.location.origin;
const projectId = params.get("project");

const client = new ApiClient(fetchTransport(apiBase));
const app = document.getElementById("app");
if (!app) {
  throw new Error("missing #app container");
}

function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

async function showProjectList(root: HTMLElement): Promise<void> {
  const projects = await client.listProjects();
  clear(root);
  root.appendChild(el(document, "h1", "", "Review projects"));
  if (projects.length === 0) {
    root.appendChild(
      el(document, "p", "", "No projects yet. Create one through the API."),
    );
    return;
  }
  const list = el(document, "ul", "project-list");
  for (const row of projects) {
    const item = el(document, "li");
    const link = el(document, "a", "", row.project_id) as HTMLAnchorElement;
    const query = new URLSearchParams(window.location.search);
    query.set("project", row.project_id);
    link.href = `?${query.toString()}`;
    item.appendChild(link);
    item.appendChild(
      el(
        document,
        "span",
        "project-info",
        ` — ${row.num_clusters} clusters, ${row.num_sentences} sentences` +
          (row.locked ? " (being edited)" : ""),
      ),
    );
    list.appendChild(item);
  }
  root.appendChild(list);
}

/** Cards become draggable; clicking one opens its neighbor panel. */
function attachCardControls(root: HTMLElement, board: BoardController): void {
  for (const cardNode of root.querySelectorAll<HTMLElement>(".card")) {
    const sentenceId = cardNode.getAttribute("data-sentence-id");
    if (!sentenceId) {
      continue;
    }
    cardNode.addEventListener("click", () => board.select(sentenceId));
    if (board.readOnly) {
      continue;
    }
    cardNode.setAttribute("draggable", "true");
    cardNode.addEventListener("dragstart", (event) => {
      event.dataTransfer?.setData("text/plain", sentenceId);
    });
  }
}

/** Columns accept card drops and host the metadata controls. */
function attachColumnControls(root: HTMLElement, board: BoardController): void {
  if (board.readOnly) {
    return;
  }
  const state = board.view();
  for (const columnNode of root.querySelectorAll<HTMLElement>(".column")) {
    const clusterId = Number(columnNode.getAttribute("data-cluster-id"));
    const column = state.clusters.find((c) => c.cluster_id === clusterId);
    if (!column) {
      continue;
    }

    columnNode.addEventListener("dragover", (event) => event.preventDefault());
    columnNode.addEventListener("drop", (event) => {
      event.preventDefault();
      const sentenceId = event.dataTransfer?.getData("text/plain");
      const home = board
        .view()
        .clusters.find((c) =>
          c.sentences.some((s) => s.sentence_id === sentenceId),
        );
      if (sentenceId && home?.cluster_id !== clusterId) {
        void board.apply({
          kind: "move-card",
          sentenceId,
          toCluster: clusterId,
        });
      }
    });

    const controls = el(document, "div", "column-controls");

    const rename = el(document, "button", "", "rename");
    rename.addEventListener("click", () => {
      const name = window.prompt("Cluster name", column.name);
      if (name !== null) {
        void board.apply({ kind: "rename-column", clusterId, name });
      }
    });
    controls.appendChild(rename);

    const recolor = el(document, "button", "", "color");
    recolor.addEventListener("click", () => {
      const color = window.prompt(
        "Color token (e.g. green, red; empty clears)",
        column.color,
      );
      if (color !== null) {
        void board.apply({ kind: "recolor-column", clusterId, color });
      }
    });
    controls.appendChild(recolor);

    const desirability = document.createElement("select");
    for (const value of ["desired", "neutral", "undesired"] as const) {
      desirability.appendChild(
        new Option(value, value, false, value === column.desirability),
      );
    }
    desirability.addEventListener("change", () => {
      void board.apply({
        kind: "set-desirability",
        clusterId,
        desirability: desirability.value as Desirability,
      });
    });
    controls.appendChild(desirability);

    const note = el(document, "button", "", "note");
    note.addEventListener("click", () => {
      const text = window.prompt("Note", column.note);
      if (text !== null) {
        void board.apply({ kind: "annotate-column", clusterId, note: text });
      }
    });
    controls.appendChild(note);

    const remove = el(document, "button", "", "delete");
    remove.addEventListener("click", () => {
      if (column.sentences.length === 0) {
        void board.apply({ kind: "remove-column", clusterId });
        return;
      }
      const target = window.prompt(
        `Cluster ${clusterId} has ${column.sentences.length} sentences. ` +
          "Move them to cluster id:",
      );
      if (target !== null && target.trim() !== "") {
        void board.apply({
          kind: "remove-column",
          clusterId,
          reassignTo: Number(target),
        });
      }
    });
    controls.appendChild(remove);

    columnNode.querySelector(".column-header")?.appendChild(controls);
  }
}

async function showBoard(root: HTMLElement, id: string): Promise<void> {
  const board = new BoardController(client, id);
  let neighborCache: { sentenceId: string; payload: SimilarPayload } | null =
    null;

  const renderSidebar = (host: HTMLElement): void => {
    clear(host);
    if (board.selected !== null) {
      if (neighborCache?.sentenceId === board.selected) {
        const panel = renderNeighborPanel(
          document,
          neighborPanel(neighborCache.payload),
        );
        const close = el(document, "button", "", "close");
        close.addEventListener("click", () => board.select(null));
        panel.appendChild(close);
        host.appendChild(panel);
      } else {
        const wanted = board.selected;
        host.appendChild(el(document, "p", "", `Loading neighbors of ${wanted}…`));
        void board.similarFor(wanted).then((payload) => {
          neighborCache = { sentenceId: wanted, payload };
          if (board.selected === wanted) {
            renderSidebar(host);
          }
        });
      }
    }
    if (board.metrics !== null) {
      host.appendChild(
        renderPanelLines(document, "Metrics", metricsLines(board.metrics)),
      );
    }

    const overlapHost = el(document, "div", "overlap-host");
    const picker = el(document, "div", "overlap-picker");
    picker.appendChild(el(document, "label", "", "Reference overlap for essay: "));
    const select = document.createElement("select");
    select.appendChild(new Option("choose…", ""));
    const essays = new Set<string>();
    for (const column of board.view().clusters) {
      for (const sentence of column.sentences) {
        essays.add(sentence.essay_id);
      }
    }
    for (const essayId of [...essays].sort()) {
      select.appendChild(new Option(essayId, essayId));
    }
    select.addEventListener("change", () => {
      if (select.value === "") {
        clear(overlapHost);
        return;
      }
      void board.overlapFor(select.value).then((payload) => {
        clear(overlapHost);
        overlapHost.appendChild(
          renderPanelLines(document, "Overlap", overlapLines(payload)),
        );
      });
    });
    picker.appendChild(select);
    host.appendChild(picker);
    host.appendChild(overlapHost);
  };

  const render = (): void => {
    clear(root);
    const header = el(document, "header", "toolbar");
    header.appendChild(el(document, "h1", "", `Project ${id}`));
    if (board.readOnly) {
      header.appendChild(
        el(
          document,
          "span",
          "badge badge-readonly",
          "read-only: another session is editing",
        ),
      );
    }
    if (board.hasPendingRetry) {
      header.appendChild(
        el(
          document,
          "span",
          "badge badge-pending",
          `${board.pendingCount} edit(s) waiting to send`,
        ),
      );
      const retry = el(document, "button", "", "retry now");
      retry.addEventListener("click", () => void board.retryPending());
      header.appendChild(retry);
    } else if (board.pendingCount > 0) {
      header.appendChild(el(document, "span", "badge badge-pending", "saving…"));
    }
    if (!board.readOnly) {
      const add = el(document, "button", "", "add column");
      add.addEventListener("click", () => {
        const name = window.prompt("Name for the new cluster (optional)") ?? "";
        void board.apply(
          name === "" ? { kind: "add-column" } : { kind: "add-column", name },
        );
      });
      header.appendChild(add);
    }
    root.appendChild(header);

    if (board.conflictMessage !== null) {
      const banner = renderConflictBanner(document, board.conflictMessage);
      const dismiss = el(document, "button", "", "dismiss");
      dismiss.addEventListener("click", () => board.dismissConflict());
      banner.appendChild(dismiss);
      root.appendChild(banner);
    }

    const layout = el(document, "div", "layout");
    const boardNode = renderBoard(document, board.view());
    layout.appendChild(boardNode);
    const sidebar = el(document, "div", "sidebar");
    renderSidebar(sidebar);
    layout.appendChild(sidebar);
    root.appendChild(layout);

    attachCardControls(boardNode, board);
    attachColumnControls(boardNode, board);
  };

  board.subscribe(render);
  await board.open();
  window.addEventListener("beforeunload", () => {
    void board.close();
  });
}

const target = app;
if (projectId === null) {
  void showProjectList(target).catch((error) => {
    clear(target);
    target.appendChild(el(document, "p", "error", String(error)));
  });
} else {
  void showBoard(target, projectId).catch((error) => {
    clear(target);
    target.appendChild(el(document, "p", "error", String(error)));
  });
}
