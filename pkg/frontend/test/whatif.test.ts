// What-if panel: live recompute, history timeline, curve rendering, the
// sequence gate against out-of-order responses, and debounce behavior.

import { beforeEach, describe, expect, it, vi } from "vitest";

import { createApi } from "../src/api.js";
import { debounce } from "../src/debounce.js";
import { createRequestGate } from "../src/gate.js";
import { absorb, createUiSession } from "../src/state.js";
import { createWhatIfPanel } from "../src/whatif.js";
import { createMockService, displayedNumbers, numbersIn } from "./mockService.js";
import fixture from "./fixture.json";

async function flush(times = 8): Promise<void> {
  for (let i = 0; i < times; i += 1) {
    await Promise.resolve();
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function sessionAfterSolve() {
  const session = createUiSession("ui-test-session");
  const turns = (fixture as any).conversation;
  absorb(session, turns[turns.length - 2].response); // state after "solve n"
  return session;
}

describe("what-if panel", () => {
  let service: ReturnType<typeof createMockService>;

  beforeEach(() => {
    service = createMockService();
    vi.stubGlobal("fetch", service.fetch);
    document.body.innerHTML = "";
  });

  it("recomputes on a power change and grows the timeline", async () => {
    const session = sessionAfterSolve();
    const panel = createWhatIfPanel(createApi(""), session, () => {}, 0);
    document.body.appendChild(panel.root);
    panel.refresh();
    expect(panel.root.querySelector(".whatif-result")!.textContent).toContain("2636");

    const slider = panel.root.querySelector("input[name='power']") as HTMLInputElement;
    slider.value = "0.9";
    slider.dispatchEvent(new Event("input", { bubbles: true }));
    await flush(12);

    expect(panel.root.querySelector(".whatif-result")!.textContent).toContain("3528");
    const history = [...panel.root.querySelectorAll(".history li")].map(
      (el) => el.textContent);
    expect(history.length).toBe(2);           // both rows kept
    expect(history[0]).toContain("2636");
    expect(history[1]).toContain("3528");
  });

  it("draws the curve from the curve endpoint's rows", async () => {
    const session = sessionAfterSolve();
    const panel = createWhatIfPanel(createApi(""), session, () => {}, 0);
    document.body.appendChild(panel.root);
    const button = [...panel.root.querySelectorAll("button")].find(
      (b) => b.textContent === "Draw power curve")!;
    button.dispatchEvent(new Event("click", { bubbles: true }));
    await flush();

    const polyline = panel.root.querySelector("polyline");
    expect(polyline).not.toBeNull();
    const curveRows = (fixture as any).curve.rows as [number, number][];
    expect(polyline!.getAttribute("points")!.split(" ").length).toBe(curveRows.length);
    // the displayed tick labels are service numbers
    const served = numbersIn((fixture as any).curve);
    for (const value of displayedNumbers(panel.root)) {
      expect(served.has(value) || value === 2636 || value === 3528,
        `displayed ${value} not from a response`).toBe(true);
    }
    // second draw hits the cache: no extra /curve request
    const calls = service.log.filter((e) => e.path === "/api/v1/curve").length;
    button.dispatchEvent(new Event("click", { bubbles: true }));
    await flush();
    expect(service.log.filter((e) => e.path === "/api/v1/curve").length).toBe(calls);
  });

  it("discards stale responses via the sequence gate", async () => {
    const deferred = createMockService({ deferCommands: true });
    vi.stubGlobal("fetch", deferred.fetch);
    const session = sessionAfterSolve();
    const panel = createWhatIfPanel(createApi(""), session, () => {}, 0);
    document.body.appendChild(panel.root);

    const name = panel.root.querySelector(".whatif-param") as HTMLInputElement;
    const value = name.nextElementSibling as HTMLInputElement;
    const apply = [...panel.root.querySelectorAll("button")].find(
      (b) => b.textContent === "Apply")!;

    name.value = "power";
    value.value = "0.8";
    apply.dispatchEvent(new Event("click", { bubbles: true }));  // request A
    await flush(2);
    name.value = "power";
    value.value = "0.9";
    apply.dispatchEvent(new Event("click", { bubbles: true }));  // request B
    await flush(2);
    expect(deferred.pendingCount()).toBe(2);

    deferred.release(1);  // B (latest) resolves first
    await flush();
    expect(panel.root.querySelector(".whatif-result")!.textContent).toContain("3528");

    deferred.release(0);  // A resolves late and must be ignored
    await flush();
    expect(panel.root.querySelector(".whatif-result")!.textContent).toContain("3528");
    expect(panel.root.querySelector(".whatif-result")!.textContent).not.toContain("2636");
  });
});

describe("primitives", () => {
  it("request gate tracks only the newest token", () => {
    const gate = createRequestGate();
    const a = gate.next();
    const b = gate.next();
    expect(gate.isLatest(a)).toBe(false);
    expect(gate.isLatest(b)).toBe(true);
    gate.invalidate();
    expect(gate.isLatest(b)).toBe(false);
  });

  it("debounce fires once with the last arguments", async () => {
    vi.useFakeTimers();
    const calls: string[] = [];
    const d = debounce((v: string) => calls.push(v), 50);
    d.call("a");
    d.call("b");
    d.call("c");
    vi.advanceTimersByTime(60);
    expect(calls).toEqual(["c"]);
    d.call("d");
    d.cancel();
    vi.advanceTimersByTime(60);
    expect(calls).toEqual(["c"]);
    vi.useRealTimers();
  });
});
