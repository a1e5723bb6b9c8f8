// Client-side mirror of a service session. Holds only what the service
// said: the latest session view, the last solve payload, and a cache of
// curve responses. No derived statistics live here.

import type { CommandResponse, CurveResponse, SessionView } from "./api.js";

export type UiSession = {
  sessionId: string;
  view: SessionView | null;
  lastSolve: Record<string, unknown> | null;
  lastReply: string;
  curveCache: Map<string, CurveResponse>;
};

export function createUiSession(sessionId: string): UiSession {
  return { sessionId, view: null, lastSolve: null, lastReply: "", curveCache: new Map() };
}

export function absorb(session: UiSession, response: CommandResponse): void {
  session.view = response.state;
  session.lastReply = response.reply;
  if (response.data && typeof response.data === "object" && "n_total" in response.data) {
    session.lastSolve = response.data;
  }
}

// Rehydrate after a reload from GET /sessions/{id}: the latest solved
// result and reply come from the recorded history.
export function restoreView(session: UiSession, view: SessionView): void {
  session.view = view;
  for (const entry of view.history) {
    if (entry.result) session.lastSolve = entry.result;
  }
  const last = view.history[view.history.length - 1];
  session.lastReply = last ? last.reply_text : "";
}

export function solveHistory(session: UiSession): Record<string, unknown>[] {
  if (!session.view) return [];
  return session.view.history
    .filter((entry) => entry.result !== null)
    .map((entry) => entry.result as Record<string, unknown>);
}

export function cacheKey(body: Record<string, unknown>): string {
  return JSON.stringify(body, Object.keys(body).sort());
}
