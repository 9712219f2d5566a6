/**
 * Thin fetch client for the lkb service. Request bodies come exclusively
 * from the schema builders; non-2xx responses become ApiError carrying
 * the service's error code and message verbatim.
 */

import {
  AskResponse,
  HealthResponse,
  IndexStats,
  IngestResponse,
  QueryResponse,
  RetrievalSettings,
  SearchMode,
  buildAskPayload,
  buildIngestPayload,
  buildQueryPayload,
  buildRebuildPayload,
} from "./schema.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let code = "http_error";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && body.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body: keep the HTTP fallback message
  }
  throw new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  private post<T>(path: string, body: string): Promise<T> {
    return fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body,
    }).then((response) => parseOrThrow<T>(response));
  }

  private get<T>(path: string): Promise<T> {
    return fetch(this.base + path).then((response) => parseOrThrow<T>(response));
  }

  ask(query: string, settings: RetrievalSettings): Promise<AskResponse> {
    return this.post("/v1/ask", buildAskPayload(query, settings));
  }

  query(query: string, settings: RetrievalSettings): Promise<QueryResponse> {
    return this.post("/v1/query", buildQueryPayload(query, settings));
  }

  ingest(
    source: string,
    format: "plain-text" | "markdown" | "csv",
    content: string,
  ): Promise<IngestResponse> {
    return this.post("/v1/documents", buildIngestPayload(source, format, content));
  }

  rebuild(mode: SearchMode, nlist?: number): Promise<IndexStats> {
    return this.post("/v1/index/rebuild", buildRebuildPayload(mode, nlist));
  }

  stats(): Promise<IndexStats> {
    return this.get("/v1/index/stats");
  }

  health(): Promise<HealthResponse> {
    return this.get("/v1/health");
  }
}
