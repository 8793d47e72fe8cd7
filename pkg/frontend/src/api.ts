/**
 * @fileoverview Typed client for the review service HTTP API.
 *
 * All traffic flows through a {@link Transport} so tests can substitute a
 * recorded session for the network and assert on the exact requests sent.
 */

import type {
  BoardState,
  EditAck,
  EditRequestBody,
  MetricsPayload,
  OverlapPayload,
  ProjectRow,
  SimilarPayload,
} from "./types.js";

/** A single HTTP exchange, independent of any browser fetch types. */
export interface ApiRequest {
  method: "GET" | "POST" | "DELETE";
  path: string;
  body?: unknown;
  headers?: Record<string, string>;
  params?: Record<string, string | number>;
}

export interface ApiResponse {
  status: number;
  body: unknown;
}

/** Sends one request and resolves with the decoded response. */
export type Transport = (request: ApiRequest) => Promise<ApiResponse>;

/** Error for any non-2xx response, carrying the HTTP status. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

function detailOf(body: unknown): string {
  if (body && typeof body === "object" && "detail" in body) {
    return String((body as { detail: unknown }).detail);
  }
  return JSON.stringify(body);
}

/** Builds a Transport on top of the browser fetch API. */
export function fetchTransport(
  baseUrl: string,
  fetchImpl: typeof fetch = fetch,
): Transport {
  return async (request) => {
    const url = new URL(request.path, baseUrl);
    for (const [key, value] of Object.entries(request.params ?? {})) {
      url.searchParams.set(key, String(value));
    }
    const response = await fetchImpl(url.toString(), {
      method: request.method,
      headers: {
        ...(request.body === undefined
          ? {}
          : { "content-type": "application/json" }),
        ...request.headers,
      },
      body: request.body === undefined ? undefined : JSON.stringify(request.body),
    });
    return { status: response.status, body: await response.json() };
  };
}

/** Typed wrapper over the service endpoints the board uses. */
export class ApiClient {
  private readonly transport: Transport;

  constructor(transport: Transport) {
    this.transport = transport;
  }

  private async call<T>(request: ApiRequest): Promise<T> {
    const response = await this.transport(request);
    if (response.status < 200 || response.status >= 300) {
      throw new ApiError(response.status, detailOf(response.body));
    }
    return response.body as T;
  }

  async listProjects(): Promise<ProjectRow[]> {
    const body = await this.call<{ projects: ProjectRow[] }>({
      method: "GET",
      path: "/projects",
    });
    return body.projects;
  }

  getState(projectId: string): Promise<BoardState> {
    return this.call({ method: "GET", path: `/projects/${projectId}/state` });
  }

  async acquireLock(projectId: string): Promise<string> {
    const body = await this.call<{ token: string }>({
      method: "POST",
      path: `/projects/${projectId}/lock`,
    });
    return body.token;
  }

  async releaseLock(projectId: string, token: string): Promise<void> {
    await this.call({
      method: "DELETE",
      path: `/projects/${projectId}/lock`,
      headers: { "x-lock-token": token },
    });
  }

  postEdit(
    projectId: string,
    edit: EditRequestBody,
    token: string,
  ): Promise<EditAck> {
    return this.call({
      method: "POST",
      path: `/projects/${projectId}/edits`,
      body: edit,
      headers: { "x-lock-token": token },
    });
  }

  getSimilar(
    projectId: string,
    sentenceId: string,
    limit = 10,
  ): Promise<SimilarPayload> {
    return this.call({
      method: "GET",
      path: `/projects/${projectId}/similar/${sentenceId}`,
      params: { limit },
    });
  }

  getMetrics(projectId: string): Promise<MetricsPayload> {
    return this.call({ method: "GET", path: `/projects/${projectId}/metrics` });
  }

  getOverlap(projectId: string, essayId: string): Promise<OverlapPayload> {
    return this.call({
      method: "GET",
      path: `/projects/${projectId}/overlap/${essayId}`,
    });
  }
}
