// Fetch mock that replays a conversation recorded from the real service,
// logging every (request, response) pair so tests can audit that displayed
// numbers all originate from responses.

import fixture from "./fixture.json";

type Recorded = { method: string; path: string; body: unknown; response: unknown };

export type MockService = {
  fetch: typeof fetch;
  log: Recorded[];
  /** let an in-flight deferred response resolve (for stale-response tests) */
  release: (index: number) => void;
  pendingCount: () => number;
};

type FixtureTurn = { text: string; response: Record<string, unknown> };

export function createMockService(options?: { deferCommands?: boolean }): MockService {
  const log: Recorded[] = [];
  const pending: Array<() => void> = [];
  const turns = (fixture as { conversation: FixtureTurn[] }).conversation;
  const curve = (fixture as { curve: Record<string, unknown> }).curve;

  function json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  const mock = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : null;

    let payload: unknown;
    let status = 200;
    if (method === "GET" && path === "/api/v1/health") {
      payload = { status: "ok", version: "test", endpoints: 13 };
    } else if (method === "POST" && path === "/api/v1/sessions") {
      payload = { session_id: "ui-test-session" };
    } else if (method === "POST" && path.endsWith("/command")) {
      const turn = turns.find((t) => t.text === body.text);
      if (!turn) {
        status = 400;
        payload = { errors: { text: `no fixture for command: ${body.text}` } };
      } else {
        payload = turn.response;
      }
    } else if (method === "POST" && path === "/api/v1/curve") {
      payload = curve;
    } else {
      status = 404;
      payload = { errors: { path: `no fixture for ${method} ${path}` } };
    }

    log.push({ method, path, body, response: payload });
    if (options?.deferCommands && path.endsWith("/command")) {
      await new Promise<void>((resolve) => pending.push(resolve));
    }
    return json(status, payload);
  }) as typeof fetch;

  return {
    fetch: mock,
    log,
    release(index) {
      pending[index]?.();
    },
    pendingCount: () => pending.length,
  };
}

/** Numeric tokens inside audited containers, collected per text node so
 * adjacent nodes never merge, and skipping digits embedded in identifiers. */
export function displayedNumbers(root: ParentNode): number[] {
  const tokens: number[] = [];
  const pattern = /(?<![\w.])-?\d+(?:\.\d+)?(?:e-?\d+)?(?![\w.])/gi;
  for (const el of root.querySelectorAll("[data-audit='server-numbers']")) {
    const walker = (el.ownerDocument as Document).createTreeWalker(
      el, NodeFilter.SHOW_TEXT);
    for (let node = walker.nextNode(); node; node = walker.nextNode()) {
      for (const match of (node.textContent ?? "").matchAll(pattern)) {
        tokens.push(Number(match[0]));
      }
    }
  }
  return tokens;
}

/** All numbers anywhere in a JSON payload. */
export function numbersIn(value: unknown, out = new Set<number>()): Set<number> {
  if (typeof value === "number") out.add(value);
  else if (Array.isArray(value)) value.forEach((v) => numbersIn(v, out));
  else if (value && typeof value === "object") {
    Object.values(value).forEach((v) => numbersIn(v, out));
  }
  return out;
}
