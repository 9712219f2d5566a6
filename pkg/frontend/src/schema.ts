/**
 * Request/response shapes of the lkb service API, plus payload builders.
 *
 * The builders are the only place request bodies are constructed, so the
 * JSON the console sends is byte-identical to the documented schema:
 * keys appear in the documented order and no extra fields ever ride
 * along. Contract tests assert on the exact serialized strings.
 */

export type SearchMode = "flat" | "ivf" | "ivfpq";

export interface Hit {
  chunk_id: string;
  doc_id: string;
  score: number;
  text: string;
}

export interface AskResponse {
  answer: string;
  model_id: string;
  hits: Hit[];
  prompt_chars: number;
  truncated: boolean;
}

export interface QueryResponse {
  hits: Hit[];
}

export interface IngestResponse {
  doc_id: string;
  chunk_count: number;
}

export interface IndexStats {
  kind: string;
  vectors: number;
  docs: number;
  nlist: number | null;
  list_sizes: number[];
}

export interface HealthResponse {
  status: string;
  index_kind: string;
  vectors: number;
  docs: number;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}

export interface RetrievalSettings {
  k: number;
  mode: SearchMode;
  nprobe: number;
  budget: number;
}

export const DEFAULT_SETTINGS: RetrievalSettings = {
  k: 4,
  mode: "flat",
  nprobe: 8,
  budget: 2048,
};

/** POST /v1/ask body: {query, k, budget}. Mode/nprobe are query-only knobs. */
export function buildAskPayload(query: string, settings: RetrievalSettings): string {
  return JSON.stringify({ query, k: settings.k, budget: settings.budget });
}

/** POST /v1/query body: {query, k, mode, nprobe}. nprobe only rides on ivf kinds. */
export function buildQueryPayload(query: string, settings: RetrievalSettings): string {
  if (settings.mode === "flat") {
    return JSON.stringify({ query, k: settings.k, mode: settings.mode });
  }
  return JSON.stringify({
    query,
    k: settings.k,
    mode: settings.mode,
    nprobe: settings.nprobe,
  });
}

/** POST /v1/documents body: {source, format, content}. */
export function buildIngestPayload(
  source: string,
  format: "plain-text" | "markdown" | "csv",
  content: string,
): string {
  return JSON.stringify({ source, format, content });
}

/** POST /v1/index/rebuild body: {mode, nlist?}. */
export function buildRebuildPayload(mode: SearchMode, nlist?: number): string {
  if (nlist === undefined) {
    return JSON.stringify({ mode });
  }
  return JSON.stringify({ mode, nlist });
}
