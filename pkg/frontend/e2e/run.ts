// End-to-end audit against a live service (POWERKIT_URL, default
// http://127.0.0.1:5000): drives the two-proportion wizard flow plus a
// what-if power change through a jsdom page, records the network log, and
// verifies every displayed number came from a service response.

import { JSDOM } from "jsdom";

const BASE = process.env.POWERKIT_URL ?? "http://127.0.0.1:5000";

type Recorded = { path: string; response: unknown };

function numbersIn(value: unknown, out = new Set<number>()): Set<number> {
  if (typeof value === "number") out.add(value);
  else if (Array.isArray(value)) value.forEach((v) => numbersIn(v, out));
  else if (value && typeof value === "object")
    Object.values(value).forEach((v) => numbersIn(v, out));
  return out;
}

async function main(): Promise<void> {
  const dom = new JSDOM("<!doctype html><div id='app'></div>", { url: BASE });
  (globalThis as any).document = dom.window.document;
  (globalThis as any).window = dom.window;

  const log: Recorded[] = [];
  const realFetch = globalThis.fetch;
  (globalThis as any).fetch = async (input: any, init?: any) => {
    const response = await realFetch(input, init);
    const clone = response.clone();
    const payload = await clone.json().catch(() => null);
    log.push({ path: String(input), response: payload });
    return response;
  };

  const { mount } = await import("../src/main.js");
  const root = dom.window.document.querySelector("#app") as HTMLElement;
  await mount(root, BASE);

  const flush = async () => {
    for (let i = 0; i < 20; i += 1)
      await new Promise((resolve) => setTimeout(resolve, 25));
  };

  const doc = dom.window.document;
  (doc.querySelector("select[name='outcome']") as HTMLSelectElement).value = "binary";
  (doc.querySelector("input[name='groups']") as HTMLInputElement).value = "2";
  doc.querySelector(".describe-form")!.dispatchEvent(
    new dom.window.Event("submit", { bubbles: true, cancelable: true }));
  await flush();

  const form = doc.querySelector(".param-form")!;
  (form.querySelector("input[name='p0']") as HTMLInputElement).value = "0.18";
  (form.querySelector("input[name='p1']") as HTMLInputElement).value = "0.14";
  (form.querySelector("input[name='power']") as HTMLInputElement).value = "0.8";
  form.dispatchEvent(new dom.window.Event("submit", { bubbles: true, cancelable: true }));
  await flush();

  const result = doc.querySelector(".result-view")!.textContent ?? "";
  if (!result.includes("1318 / 1318")) {
    throw new Error(`wizard result missing service numbers: ${result}`);
  }

  const slider = doc.querySelector(".whatif input[name='power']") as HTMLInputElement;
  slider.value = "0.9";
  slider.dispatchEvent(new dom.window.Event("input", { bubbles: true }));
  await flush();
  const live = doc.querySelector(".whatif-result")!.textContent ?? "";
  if (!live.includes("3528")) {
    throw new Error(`what-if result missing recomputed numbers: ${live}`);
  }

  // network-log audit: every displayed number has a matching response value
  const served = new Set<number>();
  for (const entry of log) numbersIn(entry.response, served);
  const shown: number[] = [];
  const pattern = /(?<![\w.])-?\d+(?:\.\d+)?(?:e-?\d+)?(?![\w.])/gi;
  for (const el of doc.querySelectorAll("[data-audit='server-numbers']")) {
    const walker = doc.createTreeWalker(el, dom.window.NodeFilter.SHOW_TEXT);
    for (let node = walker.nextNode(); node; node = walker.nextNode()) {
      for (const match of (node.textContent ?? "").matchAll(pattern)) {
        shown.push(Number(match[0]));
      }
    }
  }
  const missing = shown.filter((v) => !served.has(v));
  if (shown.length === 0 || missing.length > 0) {
    throw new Error(`audit failed; displayed-but-not-served: ${missing.join(", ")}`);
  }

  console.log(`e2e ok: ${shown.length} displayed numbers, all from service responses`);
}

main().catch((err) => {
  console.error(String(err));
  process.exit(1);
});
