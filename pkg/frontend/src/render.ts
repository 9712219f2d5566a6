/**
 * Pure HTML-string renderers. Keeping views as functions of data (no DOM
 * access) lets the contract tests assert on panel structure and ordering
 * without a browser; main.ts just assigns the strings to innerHTML.
 */

import { Hit, IndexStats, RetrievalSettings } from "./schema.js";
import { ConversationEntry } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** One provenance row per hit, in response order, score to 3 decimals. */
export function renderProvenancePanel(hits: Hit[]): string {
  if (hits.length === 0) {
    return `<div class="provenance" data-count="0"><p class="empty">no supporting chunks</p></div>`;
  }
  const rows = hits
    .map(
      (hit, rank) => `
  <details class="hit" data-rank="${rank}" data-chunk-id="${escapeHtml(hit.chunk_id)}">
    <summary>
      <span class="score" title="${hit.score}">${hit.score.toFixed(3)}</span>
      <span class="doc">${escapeHtml(hit.doc_id)}</span>
    </summary>
    <pre class="chunk-text">${escapeHtml(hit.text)}</pre>
  </details>`,
    )
    .join("");
  return `<div class="provenance" data-count="${hits.length}">${rows}\n</div>`;
}

export function renderConversationEntry(entry: ConversationEntry): string {
  const params = `k=${entry.params.k} mode=${entry.params.mode} nprobe=${entry.params.nprobe} budget=${entry.params.budget}`;
  return `
<article class="entry">
  <p class="query">${escapeHtml(entry.query)}</p>
  <p class="answer">${escapeHtml(entry.answer)}</p>
  <p class="meta">${escapeHtml(entry.modelId)} · ${entry.timestamp} · ${params}${
    entry.truncated ? " · context truncated" : ""
  }</p>
  ${renderProvenancePanel(entry.hits)}
</article>`;
}

/** The service's error code and message, verbatim. */
export function renderError(code: string, message: string): string {
  return `<div class="error" role="alert"><code>${escapeHtml(code)}</code> ${escapeHtml(
    message,
  )}</div>`;
}

export function renderDocumentList(
  documents: { doc_id: string; chunk_count: number }[],
): string {
  if (documents.length === 0) {
    return `<p class="empty">no documents ingested yet</p>`;
  }
  const rows = documents
    .map(
      (doc) =>
        `<tr><td>${escapeHtml(doc.doc_id)}</td><td class="num">${doc.chunk_count}</td></tr>`,
    )
    .join("");
  return `<table class="docs"><thead><tr><th>document</th><th>chunks</th></tr></thead><tbody>${rows}</tbody></table>`;
}

export function renderIndexStats(stats: IndexStats): string {
  const sizes = stats.list_sizes;
  const partitions =
    stats.nlist === null
      ? "exact scan, single list"
      : `${stats.nlist} partitions, sizes ${Math.min(...sizes)}..${Math.max(...sizes)}`;
  return `<dl class="stats">
  <dt>index</dt><dd>${escapeHtml(stats.kind)}</dd>
  <dt>vectors</dt><dd>${stats.vectors}</dd>
  <dt>documents</dt><dd>${stats.docs}</dd>
  <dt>layout</dt><dd>${escapeHtml(partitions)}</dd>
</dl>`;
}

export function renderSettingsForm(settings: RetrievalSettings): string {
  const option = (mode: string) =>
    `<option value="${mode}"${mode === settings.mode ? " selected" : ""}>${mode}</option>`;
  return `
<fieldset class="settings">
  <label>top K
    <input type="range" id="setting-k" min="1" max="20" value="${settings.k}" />
    <output>${settings.k}</output>
  </label>
  <label>mode
    <select id="setting-mode">${option("flat")}${option("ivf")}${option("ivfpq")}</select>
  </label>
  <label>nprobe
    <input type="number" id="setting-nprobe" min="1" value="${settings.nprobe}"${
      settings.mode === "flat" ? " disabled" : ""
    } />
  </label>
  <label>context budget
    <input type="number" id="setting-budget" min="1" value="${settings.budget}" />
  </label>
</fieldset>`;
}
