/**
 * DOM wiring for the operator console. All rendering goes through the
 * pure functions in render.ts; all requests go through ApiClient.
 */

import { ApiClient, ApiError } from "./api.js";
import { IngestResponse, SearchMode } from "./schema.js";
import {
  renderConversationEntry,
  renderDocumentList,
  renderError,
  renderIndexStats,
  renderSettingsForm,
} from "./render.js";
import { ConsoleState } from "./state.js";

declare global {
  interface Window {
    LKB_API_BASE?: string;
  }
}

const api = new ApiClient(window.LKB_API_BASE ?? "");
const state = new ConsoleState();
const sessionDocs: IngestResponse[] = [];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function showError(target: HTMLElement, error: unknown): void {
  if (error instanceof ApiError) {
    target.innerHTML = renderError(error.code, error.message);
  } else {
    target.innerHTML = renderError("network_error", String(error));
  }
}

async function refreshStats(): Promise<void> {
  const target = el("stats");
  try {
    target.innerHTML = renderIndexStats(await api.stats());
  } catch (error) {
    showError(target, error);
  }
}

function bindSettings(): void {
  const container = el("settings");
  container.innerHTML = renderSettingsForm(state.settings);
  container.addEventListener("input", (event) => {
    const input = event.target as HTMLInputElement | HTMLSelectElement;
    switch (input.id) {
      case "setting-k":
        state.updateSettings({ k: Number(input.value) });
        break;
      case "setting-mode":
        state.updateSettings({ mode: input.value as SearchMode });
        break;
      case "setting-nprobe":
        state.updateSettings({ nprobe: Number(input.value) });
        break;
      case "setting-budget":
        state.updateSettings({ budget: Number(input.value) });
        break;
    }
    container.innerHTML = renderSettingsForm(state.settings);
  });
}

function bindAsk(): void {
  const form = el<HTMLFormElement>("ask-form");
  const input = el<HTMLInputElement>("ask-input");
  const submit = el<HTMLButtonElement>("ask-submit");
  const log = el("conversation");
  const errors = el("ask-errors");

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const query = input.value.trim();
    if (!query || !state.beginAsk()) {
      return;
    }
    submit.disabled = true;
    errors.innerHTML = "";
    try {
      const response = await api.ask(query, state.settings);
      const entry = state.finishAsk(query, response);
      log.insertAdjacentHTML("afterbegin", renderConversationEntry(entry));
      input.value = "";
    } catch (error) {
      state.failAsk();
      showError(errors, error);
    } finally {
      submit.disabled = false;
    }
  });
}

function formatForName(name: string): "plain-text" | "markdown" | "csv" {
  const lowered = name.toLowerCase();
  if (lowered.endsWith(".csv")) {
    return "csv";
  }
  if (lowered.endsWith(".md") || lowered.endsWith(".markdown")) {
    return "markdown";
  }
  return "plain-text";
}

function bindUpload(): void {
  const picker = el<HTMLInputElement>("upload-input");
  const confirmation = el("upload-confirmation");
  const docList = el("doc-list");

  picker.addEventListener("change", async () => {
    const file = picker.files?.[0];
    if (!file) {
      return;
    }
    try {
      const body = await api.ingest(file.name, formatForName(file.name), await file.text());
      sessionDocs.push(body);
      confirmation.textContent = `ingested ${body.doc_id} (${body.chunk_count} chunks)`;
      docList.innerHTML = renderDocumentList(
        sessionDocs.map((doc) => ({ doc_id: doc.doc_id, chunk_count: doc.chunk_count })),
      );
      await refreshStats();
    } catch (error) {
      showError(confirmation, error);
    } finally {
      picker.value = "";
    }
  });
}

document.addEventListener("DOMContentLoaded", () => {
  bindSettings();
  bindAsk();
  bindUpload();
  void refreshStats();
});
