/** Thin typed client for the session service; the server stays authoritative. */

import type {
  ActRequest,
  ActResponse,
  CreateSessionBody,
  EventsResponse,
  SessionSummary,
  SessionView,
} from "./types.js";

/** The slice of the fetch Response surface the client relies on. */
export interface ResponseLike {
  ok: boolean;
  status: number;
  statusText: string;
  text(): Promise<string>;
}

export type FetchLike = (
  url: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
  },
) => Promise<ResponseLike>;

/** A request the server answered with an error, or that never reached it (status 0). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

const defaultFetch: FetchLike = (url, init) => globalThis.fetch(url, init);

export class ApiClient {
  private readonly baseUrl: string;

  constructor(
    baseUrl: string,
    private readonly fetchFn: FetchLike = defaultFetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(
    path: string,
    init?: { method?: string; body?: unknown },
  ): Promise<T> {
    let response: ResponseLike;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method: init?.method ?? "GET",
        headers:
          init?.body === undefined ? {} : { "content-type": "application/json" },
        body: init?.body === undefined ? undefined : JSON.stringify(init.body),
      });
    } catch (err) {
      throw new ApiError(0, `cannot reach ${this.baseUrl}: ${String(err)}`);
    }
    const text = await response.text();
    let body: unknown = null;
    if (text) {
      try {
        body = JSON.parse(text);
      } catch {
        body = text;
      }
    }
    if (!response.ok) {
      const detail =
        body !== null && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : `${response.status} ${response.statusText}`;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  createSession(body: CreateSessionBody): Promise<SessionSummary> {
    return this.request("/sessions", { method: "POST", body });
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request("/sessions");
  }

  summary(id: string): Promise<SessionSummary> {
    return this.request(`/sessions/${encodeURIComponent(id)}`);
  }

  view(id: string): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(id)}/view`);
  }

  act(id: string, action: ActRequest): Promise<ActResponse> {
    return this.request(`/sessions/${encodeURIComponent(id)}/act`, {
      method: "POST",
      body: action,
    });
  }

  events(id: string, after: number): Promise<EventsResponse> {
    return this.request(
      `/sessions/${encodeURIComponent(id)}/events?after=${after}`,
    );
  }

  close(id: string): Promise<{ closed: string }> {
    return this.request(`/sessions/${encodeURIComponent(id)}`, {
      method: "DELETE",
    });
  }
}
