/**
 * Console state: retrieval settings, the conversation log, and the
 * single-flight guard for ask requests. Nothing persists beyond the
 * session; the service is the source of truth.
 */

import { AskResponse, DEFAULT_SETTINGS, RetrievalSettings } from "./schema.js";

export interface ConversationEntry {
  query: string;
  answer: string;
  modelId: string;
  hits: AskResponse["hits"];
  truncated: boolean;
  timestamp: string;
  params: { k: number; mode: string; nprobe: number; budget: number };
}

export class ConsoleState {
  settings: RetrievalSettings = { ...DEFAULT_SETTINGS };
  entries: ConversationEntry[] = [];
  pending = false;

  updateSettings(patch: Partial<RetrievalSettings>): RetrievalSettings {
    this.settings = { ...this.settings, ...patch };
    return this.settings;
  }

  /** Marks an ask in flight; false if one already is (submit stays disabled). */
  beginAsk(): boolean {
    if (this.pending) {
      return false;
    }
    this.pending = true;
    return true;
  }

  finishAsk(query: string, response: AskResponse, now: Date = new Date()): ConversationEntry {
    const entry: ConversationEntry = {
      query,
      answer: response.answer,
      modelId: response.model_id,
      hits: response.hits,
      truncated: response.truncated,
      timestamp: now.toISOString(),
      params: { ...this.settings },
    };
    this.entries.push(entry);
    this.pending = false;
    return entry;
  }

  failAsk(): void {
    this.pending = false;
  }
}
