/**
 * Contract tests against a stubbed service: the console must send
 * byte-exact request bodies for every control state and surface the
 * service's responses and errors without reshaping them.
 */

import { afterEach, describe, expect, it, vi } from "vitest";
import { ApiClient, ApiError } from "../src/api.js";
import {
  DEFAULT_SETTINGS,
  RetrievalSettings,
  SearchMode,
  buildAskPayload,
  buildIngestPayload,
  buildQueryPayload,
} from "../src/schema.js";

function stubFetch(status: number, body: unknown) {
  const mock = vi.fn(async () =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    }),
  );
  vi.stubGlobal("fetch", mock);
  return mock;
}

function sentBody(mock: ReturnType<typeof vi.fn>, call = 0): string {
  const init = mock.mock.calls[call]?.[1] as RequestInit;
  return init.body as string;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

const ASK_RESPONSE = {
  answer: "MOCK-ANSWER sha=abcd1234 chunks=[c1]",
  model_id: "mock",
  hits: [{ chunk_id: "c1", doc_id: "d1", score: 0.91, text: "chunk body" }],
  prompt_chars: 120,
  truncated: false,
};

describe("ask payload schema", () => {
  const kValues = [1, 4, 10];
  const modes: SearchMode[] = ["flat", "ivf", "ivfpq"];
  const nprobes = [1, 8, 32];

  it("matches {query, k, budget} byte-for-byte for every control state", async () => {
    for (const k of kValues) {
      for (const mode of modes) {
        for (const nprobe of nprobes) {
          const settings: RetrievalSettings = { k, mode, nprobe, budget: 2048 };
          const mock = stubFetch(200, ASK_RESPONSE);
          await new ApiClient().ask("what is the torque spec?", settings);
          expect(sentBody(mock)).toBe(
            `{"query":"what is the torque spec?","k":${k},"budget":2048}`,
          );
          expect(mock).toHaveBeenCalledWith("/v1/ask", expect.objectContaining({
            method: "POST",
            headers: { "Content-Type": "application/json" },
          }));
        }
      }
    }
  });

  it("reflects budget changes in the next payload", async () => {
    const mock = stubFetch(200, ASK_RESPONSE);
    const client = new ApiClient();
    await client.ask("q", { ...DEFAULT_SETTINGS, budget: 512 });
    await client.ask("q", { ...DEFAULT_SETTINGS, budget: 4096 });
    expect(sentBody(mock, 0)).toBe(`{"query":"q","k":4,"budget":512}`);
    expect(sentBody(mock, 1)).toBe(`{"query":"q","k":4,"budget":4096}`);
  });

  it("returns the service response unchanged", async () => {
    stubFetch(200, ASK_RESPONSE);
    const body = await new ApiClient().ask("q", DEFAULT_SETTINGS);
    expect(body).toEqual(ASK_RESPONSE);
  });
});

describe("query payload schema", () => {
  it("carries mode and nprobe only for ivf kinds", async () => {
    const flat = stubFetch(200, { hits: [] });
    await new ApiClient().query("q", { k: 3, mode: "flat", nprobe: 8, budget: 2048 });
    expect(sentBody(flat)).toBe(`{"query":"q","k":3,"mode":"flat"}`);

    const ivf = stubFetch(200, { hits: [] });
    await new ApiClient().query("q", { k: 3, mode: "ivf", nprobe: 12, budget: 2048 });
    expect(sentBody(ivf)).toBe(`{"query":"q","k":3,"mode":"ivf","nprobe":12}`);

    const ivfpq = stubFetch(200, { hits: [] });
    await new ApiClient().query("q", { k: 5, mode: "ivfpq", nprobe: 2, budget: 2048 });
    expect(sentBody(ivfpq)).toBe(`{"query":"q","k":5,"mode":"ivfpq","nprobe":2}`);
  });
});

describe("ingest payload schema", () => {
  it("matches {source, format, content}", async () => {
    const mock = stubFetch(200, { doc_id: "m.txt-abc", chunk_count: 2 });
    await new ApiClient().ingest("m.txt", "plain-text", "file body\nline two");
    expect(sentBody(mock)).toBe(
      `{"source":"m.txt","format":"plain-text","content":"file body\\nline two"}`,
    );
  });
});

describe("error handling", () => {
  it("surfaces the service error code and message verbatim", async () => {
    stubFetch(409, { error: { code: "empty_index", message: "no vectors indexed yet" } });
    const failure = new ApiClient().ask("q", DEFAULT_SETTINGS);
    await expect(failure).rejects.toBeInstanceOf(ApiError);
    await expect(failure).rejects.toMatchObject({
      status: 409,
      code: "empty_index",
      message: "no vectors indexed yet",
    });
  });

  it("falls back to an http_error code for non-JSON bodies", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => new Response("<html>", { status: 502 })));
    await expect(new ApiClient().health()).rejects.toMatchObject({
      status: 502,
      code: "http_error",
    });
  });
});

describe("payload builders stay aligned with the client", () => {
  it("ask/query/ingest builders produce exactly what the client sends", async () => {
    const settings: RetrievalSettings = { k: 7, mode: "ivf", nprobe: 3, budget: 100 };
    const mock = stubFetch(200, ASK_RESPONSE);
    const client = new ApiClient();
    await client.ask("abc", settings);
    expect(sentBody(mock, 0)).toBe(buildAskPayload("abc", settings));

    const queryMock = stubFetch(200, { hits: [] });
    await client.query("abc", settings);
    expect(sentBody(queryMock, 0)).toBe(buildQueryPayload("abc", settings));

    const ingestMock = stubFetch(200, { doc_id: "x", chunk_count: 1 });
    await client.ingest("a.csv", "csv", "1,2");
    expect(sentBody(ingestMock, 0)).toBe(buildIngestPayload("a.csv", "csv", "1,2"));
  });
});
