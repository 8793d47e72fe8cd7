/**
 * @fileoverview Board state controller.
 *
 * Holds the last server-acknowledged state plus a queue of optimistic local
 * edits. The rendered view is always the acknowledged state with the queue
 * replayed on top, so the board never shows anything that is not reachable
 * by replaying edits over server truth. Conflicts (HTTP 409) drop the queue
 * and reload state from the server; network failures keep edits queued for
 * an explicit retry.
 */

import { ApiClient, ApiError } from "./api.js";
import { editForGesture, type Gesture } from "./gestures.js";
import type {
  BoardState,
  ClusterColumn,
  EditBody,
  MetricsPayload,
  OverlapPayload,
  SentenceCard,
  SimilarPayload,
} from "./types.js";

function columnById(state: BoardState, clusterId: number): ClusterColumn {
  const column = state.clusters.find((c) => c.cluster_id === clusterId);
  if (!column) {
    throw new Error(`unknown cluster: ${clusterId}`);
  }
  return column;
}

function sortCards(cards: SentenceCard[]): void {
  cards.sort((a, b) => (a.sentence_id < b.sentence_id ? -1 : 1));
}

/**
 * Advances a state document by one edit, mirroring the server's replay
 * semantics exactly: same membership moves, same id assignment for created
 * clusters, same sentence ordering inside a column.
 */
export function applyEditToState(state: BoardState, edit: EditBody): void {
  switch (edit.kind) {
    case "move_sentence": {
      const sentenceId = edit.payload["sentence_id"] as string;
      const toCluster = edit.payload["to_cluster"] as number;
      let card: SentenceCard | undefined;
      for (const column of state.clusters) {
        const at = column.sentences.findIndex(
          (s) => s.sentence_id === sentenceId,
        );
        if (at >= 0) {
          card = column.sentences.splice(at, 1)[0];
          break;
        }
      }
      if (!card) {
        throw new Error(`unknown sentence: ${sentenceId}`);
      }
      const target = columnById(state, toCluster);
      target.sentences.push(card);
      sortCards(target.sentences);
      break;
    }
    case "create_cluster": {
      state.clusters.push({
        cluster_id: state.next_cluster_id,
        name: (edit.payload["name"] as string | undefined) ?? "",
        color: "",
        desirability: "neutral",
        note: "",
        sentences: [],
      });
      state.next_cluster_id += 1;
      break;
    }
    case "delete_cluster": {
      const clusterId = edit.payload["cluster_id"] as number;
      const at = state.clusters.findIndex((c) => c.cluster_id === clusterId);
      if (at < 0) {
        throw new Error(`unknown cluster: ${clusterId}`);
      }
      const [removed] = state.clusters.splice(at, 1);
      const reassignTo = edit.payload["reassign_to"] as number | undefined;
      if (reassignTo !== undefined) {
        const target = columnById(state, reassignTo);
        target.sentences.push(...removed.sentences);
        sortCards(target.sentences);
      } else if (removed.sentences.length > 0) {
        throw new Error(`cluster ${clusterId} is not empty`);
      }
      break;
    }
    case "set_meta": {
      const column = columnById(state, edit.payload["cluster_id"] as number);
      if ("name" in edit.payload) {
        column.name = edit.payload["name"] as string;
      }
      if ("color" in edit.payload) {
        column.color = edit.payload["color"] as string;
      }
      if ("desirability" in edit.payload) {
        column.desirability = edit.payload[
          "desirability"
        ] as ClusterColumn["desirability"];
      }
      if ("note" in edit.payload) {
        column.note = edit.payload["note"] as string;
      }
      break;
    }
  }
  state.version += 1;
  state.num_edits += 1;
}

interface QueuedEdit {
  edit: EditBody;
}

export class BoardController {
  private readonly client: ApiClient;
  readonly projectId: string;

  private acked: BoardState | null = null;
  private queue: QueuedEdit[] = [];
  private token: string | null = null;
  private pump: Promise<void> = Promise.resolve();
  private flushing = false;
  private listeners: (() => void)[] = [];

  /** True when another session holds the editing lock. */
  readOnly = false;
  /** Banner text after an edit conflict; null when none is showing. */
  conflictMessage: string | null = null;
  /** True while edits sit in the queue waiting for a network retry. */
  hasPendingRetry = false;
  /** Server edit ids acknowledged this session, in order. */
  readonly ackedEditIds: number[] = [];
  /** Latest project metrics; refreshed after every acknowledged gesture. */
  metrics: MetricsPayload | null = null;
  /** Sentence whose neighbor panel is open, if any. */
  selected: string | null = null;

  constructor(client: ApiClient, projectId: string) {
    this.client = client;
    this.projectId = projectId;
  }

  /** Registers a change listener; returns an unsubscribe function. */
  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  /**
   * Loads state and tries to become the single editing session. When the
   * lock is already held elsewhere the board stays usable read-only.
   */
  async open(): Promise<void> {
    this.acked = await this.client.getState(this.projectId);
    try {
      this.token = await this.client.acquireLock(this.projectId);
      this.readOnly = false;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.token = null;
        this.readOnly = true;
      } else {
        throw error;
      }
    }
    await this.refreshMetrics();
    this.emit();
  }

  /** Releases the editing lock, if this session holds one. */
  async close(): Promise<void> {
    if (this.token !== null) {
      try {
        await this.client.releaseLock(this.projectId, this.token);
      } catch {
        // lock files expire with the session; a failed release is harmless
      }
      this.token = null;
    }
  }

  /** Last server-acknowledged state (no optimistic edits). */
  get serverState(): BoardState {
    if (!this.acked) {
      throw new Error("board is not open");
    }
    return this.acked;
  }

  /** Number of optimistic edits not yet acknowledged. */
  get pendingCount(): number {
    return this.queue.length;
  }

  /**
   * The state the board renders: server-acknowledged state with queued
   * optimistic edits replayed on top.
   */
  view(): BoardState {
    const snapshot = structuredClone(this.serverState);
    for (const entry of this.queue) {
      try {
        applyEditToState(snapshot, entry.edit);
      } catch {
        // a queued edit the server state no longer supports; the server
        // will reject it and the conflict path reloads truth
      }
    }
    return snapshot;
  }

  /**
   * Applies one gesture: exactly one edit is queued, shown optimistically,
   * and sent to the server. Resolves once the send attempt (and any edits
   * queued before it) completed, conflicted, or parked for retry.
   */
  apply(gesture: Gesture): Promise<void> {
    if (this.readOnly) {
      throw new Error(
        "project is read-only: the editing lock is held by another session",
      );
    }
    if (!this.acked) {
      throw new Error("board is not open");
    }
    this.queue.push({ edit: editForGesture(gesture) });
    this.emit();
    this.pump = this.pump.then(() => this.flush());
    return this.pump;
  }

  /** Re-sends edits parked after a network failure. */
  retryPending(): Promise<void> {
    this.pump = this.pump.then(() => this.flush());
    return this.pump;
  }

  /** Hides the conflict banner. */
  dismissConflict(): void {
    this.conflictMessage = null;
    this.emit();
  }

  /** Marks a sentence as selected for the neighbor panel. */
  select(sentenceId: string | null): void {
    this.selected = sentenceId;
    this.emit();
  }

  private async refreshMetrics(): Promise<void> {
    try {
      this.metrics = await this.client.getMetrics(this.projectId);
    } catch {
      // a failed metrics read keeps the previous panel; edits are unaffected
    }
  }

  /** Drops optimistic edits and re-reads server truth. */
  private async reloadFromServer(banner: string | null): Promise<void> {
    this.queue = [];
    this.hasPendingRetry = false;
    this.conflictMessage = banner;
    this.acked = await this.client.getState(this.projectId);
    await this.refreshMetrics();
    this.emit();
  }

  private async flush(): Promise<void> {
    if (this.flushing || this.readOnly || this.token === null) {
      return;
    }
    this.flushing = true;
    let ackedAny = false;
    try {
      while (this.queue.length > 0) {
        const entry = this.queue[0];
        const acked = this.serverState;
        let ack;
        try {
          ack = await this.client.postEdit(
            this.projectId,
            { ...entry.edit, expected_version: acked.version },
            this.token,
          );
        } catch (error) {
          if (error instanceof ApiError) {
            // 409: stale version or lost lock; 400/404: the edit no longer
            // applies. Either way server truth wins: banner plus reload.
            await this.reloadFromServer(error.detail);
            return;
          }
          // network failure: keep the edit queued and surface the badge
          this.hasPendingRetry = true;
          this.emit();
          return;
        }
        this.queue.shift();
        this.hasPendingRetry = false;
        this.ackedEditIds.push(ack.edit_id);
        ackedAny = true;
        applyEditToState(acked, entry.edit);
        if (acked.version !== ack.version) {
          // local replay diverged from the server; trust the server
          await this.reloadFromServer(null);
          return;
        }
        this.emit();
      }
      if (ackedAny) {
        await this.refreshMetrics();
        this.emit();
      }
    } finally {
      this.flushing = false;
    }
  }

  /** Nearest neighbors of a sentence, straight from the retrieval run. */
  similarFor(sentenceId: string, limit = 10): Promise<SimilarPayload> {
    return this.client.getSimilar(this.projectId, sentenceId, limit);
  }

  /** Reference overlap score for one essay. */
  overlapFor(essayId: string): Promise<OverlapPayload> {
    return this.client.getOverlap(this.projectId, essayId);
  }
}
