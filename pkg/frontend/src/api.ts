// Typed client over the powerkit HTTP API. Every number the UI shows comes
// out of one of these responses; nothing is computed on the client.

export type SolveResponse = {
  sample_size?: number;
  n_per_arm: number[];
  n_total: number;
  achieved_power: number;
  events_required?: number;
  effect_solved?: number;
  formula_id: string;
  inputs: Record<string, unknown>;
  result_id: string;
};

export type SessionView = {
  session_id: string;
  created: number;
  updated: number;
  descriptor: Record<string, unknown>;
  chosen_test: string | null;
  known_params: Record<string, unknown>;
  pending: string[];
  history: HistoryEntry[];
};

export type HistoryEntry = {
  t: number;
  command: string;
  reply_text: string;
  result: Record<string, unknown> | null;
};

export type CommandResponse = {
  reply: string;
  error: boolean;
  data?: Record<string, unknown> | null;
  state: SessionView;
  result_id?: string;
  notice?: string;
};

export type CurveResponse = {
  sweep: string;
  x: string;
  y: string;
  rows: [number, number][];
};

export type FieldErrors = { errors: Record<string, string> };

export class ApiError extends Error {
  status: number;
  fields: Record<string, string>;

  constructor(status: number, fields: Record<string, string>) {
    super(
      Object.entries(fields)
        .map(([k, v]) => `${k}: ${v}`)
        .join("; ") || `request failed (${status})`,
    );
    this.status = status;
    this.fields = fields;
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    const body = (await response.json().catch(() => ({ errors: {} }))) as FieldErrors;
    throw new ApiError(response.status, body.errors ?? {});
  }
  return response.json() as Promise<T>;
}

export type Api = ReturnType<typeof createApi>;

export function createApi(baseUrl = "") {
  return {
    baseUrl,
    healthy: () => request<{ status: string; version: string }>(baseUrl, "/api/v1/health"),
    createSession: () =>
      request<{ session_id: string }>(baseUrl, "/api/v1/sessions", { method: "POST", body: "{}" }),
    getSession: (id: string) => request<SessionView>(baseUrl, `/api/v1/sessions/${id}`),
    command: (id: string, text: string) =>
      request<CommandResponse>(baseUrl, `/api/v1/sessions/${id}/command`, {
        method: "POST",
        body: JSON.stringify({ text }),
      }),
    curve: (body: Record<string, unknown>) =>
      request<CurveResponse>(baseUrl, "/api/v1/curve", {
        method: "POST",
        body: JSON.stringify(body),
      }),
    result: (id: string) =>
      request<{ response: Record<string, unknown> }>(baseUrl, `/api/v1/results/${id}`),
  };
}
