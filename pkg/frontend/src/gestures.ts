/**
 * @fileoverview Board gestures and their translation into edits.
 *
 * Every gesture the board supports maps to exactly one edit body; the
 * controller never sends more than one request per gesture.
 */

import type { Desirability, EditBody } from "./types.js";

/** A reviewer action on the board, in UI vocabulary. */
export type Gesture =
  | { kind: "move-card"; sentenceId: string; toCluster: number }
  | { kind: "add-column"; name?: string }
  | { kind: "rename-column"; clusterId: number; name: string }
  | { kind: "recolor-column"; clusterId: number; color: string }
  | { kind: "set-desirability"; clusterId: number; desirability: Desirability }
  | { kind: "annotate-column"; clusterId: number; note: string }
  | { kind: "remove-column"; clusterId: number; reassignTo?: number };

/** Translates one gesture into the single edit body it stands for. */
export function editForGesture(gesture: Gesture): EditBody {
  switch (gesture.kind) {
    case "move-card":
      return {
        kind: "move_sentence",
        payload: {
          sentence_id: gesture.sentenceId,
          to_cluster: gesture.toCluster,
        },
      };
    case "add-column":
      return {
        kind: "create_cluster",
        payload: gesture.name === undefined ? {} : { name: gesture.name },
      };
    case "rename-column":
      return {
        kind: "set_meta",
        payload: { cluster_id: gesture.clusterId, name: gesture.name },
      };
    case "recolor-column":
      return {
        kind: "set_meta",
        payload: { cluster_id: gesture.clusterId, color: gesture.color },
      };
    case "set-desirability":
      return {
        kind: "set_meta",
        payload: {
          cluster_id: gesture.clusterId,
          desirability: gesture.desirability,
        },
      };
    case "annotate-column":
      return {
        kind: "set_meta",
        payload: { cluster_id: gesture.clusterId, note: gesture.note },
      };
    case "remove-column":
      return {
        kind: "delete_cluster",
        payload:
          gesture.reassignTo === undefined
            ? { cluster_id: gesture.clusterId }
            : {
                cluster_id: gesture.clusterId,
                reassign_to: gesture.reassignTo,
              },
      };
  }
}
