// Wizard flow against the recorded service conversation: selection,
// checklist, solve, and the zero-client-computation audit.

import { beforeEach, describe, expect, it, vi } from "vitest";

import { mount } from "../src/main.js";
import { createMockService, displayedNumbers, numbersIn } from "./mockService.js";

async function flush(times = 8): Promise<void> {
  for (let i = 0; i < times; i += 1) {
    await Promise.resolve();
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function setSelect(root: ParentNode, name: string, value: string): void {
  const el = root.querySelector(`select[name='${name}']`) as HTMLSelectElement;
  el.value = value;
}

async function driveTwoProportionFlow(root: HTMLElement): Promise<void> {
  setSelect(root, "outcome", "binary");
  (root.querySelector("input[name='groups']") as HTMLInputElement).value = "2";
  setSelect(root, "pairing", "independent");
  setSelect(root, "comparison", "between_groups");
  setSelect(root, "assumption", "unspecified");
  root.querySelector(".describe-form")!.dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }));
  await flush();

  const form = root.querySelector(".param-form")!;
  (form.querySelector("input[name='p0']") as HTMLInputElement).value = "0.18";
  (form.querySelector("input[name='p1']") as HTMLInputElement).value = "0.14";
  (form.querySelector("input[name='power']") as HTMLInputElement).value = "0.8";
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
  await flush(16);
}

describe("wizard flow", () => {
  let service: ReturnType<typeof createMockService>;
  let root: HTMLElement;

  beforeEach(async () => {
    service = createMockService();
    vi.stubGlobal("fetch", service.fetch);
    document.body.innerHTML = "<div id='app'></div>";
    root = document.querySelector("#app") as HTMLElement;
    await mount(root, "");
  });

  it("walks describe -> recommendation -> parameters -> result", async () => {
    await driveTwoProportionFlow(root);
    expect(root.querySelector(".recommendation")!.textContent).toContain(
      "two_proportions_z");
    const result = root.querySelector(".result-view")!.textContent!;
    expect(result).toContain("1318 / 1318");
    expect(result).toContain("2636");
    expect(result).toContain("z.two_prop(pooled_h0,unpooled_h1)");
  });

  it("renders the pending checklist from the service", async () => {
    setSelect(root, "outcome", "binary");
    root.querySelector(".describe-form")!.dispatchEvent(
      new Event("submit", { bubbles: true, cancelable: true }));
    await flush();
    const names = [...root.querySelectorAll(".param-form input")].map(
      (el) => (el as HTMLInputElement).name);
    expect(names.slice(0, 3)).toEqual(["p0", "p1", "power"]);
    expect(names).toContain("alpha");  // defaults shown prefilled
  });

  it("displays only numbers that exist in service responses", async () => {
    await driveTwoProportionFlow(root);
    const served = new Set<number>();
    for (const entry of service.log) numbersIn(entry.response, served);
    const shown = displayedNumbers(document);
    expect(shown.length).toBeGreaterThan(3);
    for (const value of shown) {
      expect(served.has(value), `displayed ${value} not in any response`).toBe(true);
    }
  });

  it("surfaces service field errors verbatim", async () => {
    setSelect(root, "outcome", "binary");
    (root.querySelector("input[name='groups']") as HTMLInputElement).value = "7";
    root.querySelector(".describe-form")!.dispatchEvent(
      new Event("submit", { bubbles: true, cancelable: true }));
    await flush();
    expect(root.querySelector(".error-box")!.textContent).toContain("no fixture");
  });
});

describe("session restore", () => {
  it("rehydrates a stored session from GET /sessions/{id}", async () => {
    const service = createMockService();
    const turns = (await import("./fixture.json")).default.conversation;
    const solved = turns[turns.length - 2]!.response.state;
    const restoringFetch: typeof fetch = async (input, init) => {
      const path = String(input).replace(/^https?:\/\/[^/]+/, "");
      if ((init?.method ?? "GET") === "GET" && path === "/api/v1/sessions/resume-me") {
        service.log.push({ method: "GET", path, body: null, response: solved });
        return new Response(JSON.stringify(solved), { status: 200 });
      }
      return service.fetch(input, init);
    };
    vi.stubGlobal("fetch", restoringFetch);
    document.body.innerHTML = "<div id='app'></div>";
    const root = document.querySelector("#app") as HTMLElement;
    const { mount } = await import("../src/main.js");
    await mount(root, "", "resume-me");
    await flush();
    const result = root.querySelector(".result-view")!.textContent!;
    expect(result).toContain("1318 / 1318");
    expect(root.querySelector(".recommendation")!.textContent).toContain(
      "two_proportions_z");
  });
});
