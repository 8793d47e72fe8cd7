/**
 * @fileoverview Test transports built from the recorded service session.
 *
 * fixtures/session.json is produced by scripts/record_ui_session.py in the
 * repository root: it drives the real HTTP service through one of each board
 * gesture and stores every request/response verbatim. Tests replay the same
 * gestures through the client and compare against that recording.
 */

import type { ApiRequest, ApiResponse, Transport } from "../src/api.js";
import type { Gesture } from "../src/gestures.js";
import type {
  BoardState,
  MetricsPayload,
  OverlapPayload,
  SimilarPayload,
} from "../src/types.js";
import sessionJson from "./fixtures/session.json";

export interface RecordedExchange {
  request: {
    method: string;
    path: string;
    body?: unknown;
    headers?: Record<string, string>;
    params?: Record<string, unknown>;
  };
  response: { status: number; body: unknown };
}

export interface RecordedSession {
  token: string;
  create_project: RecordedExchange;
  initial_state: RecordedExchange;
  lock: RecordedExchange;
  gestures: (RecordedExchange & { gesture: Gesture })[];
  conflicts: {
    stale_edit: RecordedExchange;
    wrong_token: RecordedExchange;
    second_lock: RecordedExchange;
  };
  state: RecordedExchange;
  similar: RecordedExchange;
  metrics: RecordedExchange;
  overlap: RecordedExchange;
  projects: RecordedExchange;
}

export const session = sessionJson as unknown as RecordedSession;

export const initialState = session.initial_state.response.body as BoardState;
export const finalState = session.state.response.body as BoardState;
export const similarPayload = session.similar.response.body as SimilarPayload;
export const metricsPayload = session.metrics.response.body as MetricsPayload;
export const overlapPayload = session.overlap.response.body as OverlapPayload;

export interface CapturingTransport {
  transport: Transport;
  /** Every request sent, in order, deep-copied at call time. */
  requests: ApiRequest[];
  /** The subset of requests that were edit submissions. */
  editRequests: () => ApiRequest[];
}

export interface SessionTransportOptions {
  /** Replaces the response for the nth edit POST (0-based). */
  editResponses?: Record<number, ApiResponse | Error>;
  /** Response for POST lock; defaults to the recorded grant. */
  lockResponse?: ApiResponse;
  /** Responses for GET state in call order; last one repeats. */
  stateResponses?: ApiResponse[];
}

function copy<T>(value: T): T {
  return structuredClone(value);
}

/**
 * A transport that answers like the recorded session: initial state first,
 * then the recorded lock grant, then the recorded edit acks in order.
 */
export function sessionTransport(
  options: SessionTransportOptions = {},
): CapturingTransport {
  const requests: ApiRequest[] = [];
  let stateCalls = 0;
  let editCalls = 0;

  const stateResponses = options.stateResponses ?? [
    copy(session.initial_state.response),
    copy(session.state.response),
  ];

  const transport: Transport = async (request) => {
    requests.push(copy(request));
    const { method, path } = request;
    if (method === "GET" && path.endsWith("/state")) {
      const index = Math.min(stateCalls, stateResponses.length - 1);
      stateCalls += 1;
      return copy(stateResponses[index]);
    }
    if (method === "POST" && path.endsWith("/lock")) {
      return copy(options.lockResponse ?? session.lock.response);
    }
    if (method === "DELETE" && path.endsWith("/lock")) {
      return { status: 200, body: { released: true } };
    }
    if (method === "POST" && path.endsWith("/edits")) {
      const index = editCalls;
      editCalls += 1;
      const override = options.editResponses?.[index];
      if (override instanceof Error) {
        throw override;
      }
      if (override) {
        return copy(override);
      }
      const recorded = session.gestures[index];
      if (!recorded) {
        throw new Error(`unexpected edit request #${index}: ${JSON.stringify(request)}`);
      }
      return copy(recorded.response);
    }
    if (method === "GET" && path.includes("/similar/")) {
      return copy(session.similar.response);
    }
    if (method === "GET" && path.endsWith("/metrics")) {
      return copy(session.metrics.response);
    }
    if (method === "GET" && path.includes("/overlap/")) {
      return copy(session.overlap.response);
    }
    if (method === "GET" && path === "/projects") {
      return copy(session.projects.response);
    }
    throw new Error(`unhandled request: ${method} ${path}`);
  };

  return {
    transport,
    requests,
    editRequests: () =>
      requests.filter((r) => r.method === "POST" && r.path.endsWith("/edits")),
  };
}

/** The recorded request in the shape the client's transport emits. */
export function expectedEditRequest(recorded: RecordedExchange): ApiRequest {
  return {
    method: "POST",
    path: recorded.request.path,
    body: recorded.request.body,
    headers: recorded.request.headers as Record<string, string>,
  };
}
