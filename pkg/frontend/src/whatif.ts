// What-if panel: live recompute on assumption edits, a history timeline of
// prior answers, and a power-curve chart. Requests are debounced and
// sequence-numbered; a stale response can never overwrite a newer one.

import type { Api, CommandResponse } from "./api.js";
import { renderCurve } from "./chart.js";
import { debounce } from "./debounce.js";
import { createRequestGate } from "./gate.js";
import { absorb, cacheKey, solveHistory, type UiSession } from "./state.js";

export type WhatIfPanel = {
  root: HTMLElement;
  refresh: () => void;
};

export function createWhatIfPanel(
  api: Api,
  session: UiSession,
  onUpdate: () => void,
  debounceMs = 150,
): WhatIfPanel {
  const root = document.createElement("section");
  root.className = "whatif";

  const controls = document.createElement("div");
  controls.className = "whatif-controls";
  const power = labeledRange("power", "0.5", "0.99", "0.01", "0.8");
  const alpha = labeledInput("alpha", "0.05");
  const paramName = document.createElement("input");
  paramName.placeholder = "parameter";
  paramName.className = "whatif-param";
  const paramValue = document.createElement("input");
  paramValue.placeholder = "value";
  const apply = document.createElement("button");
  apply.textContent = "Apply";
  controls.append(power.wrap, alpha.wrap, paramName, paramValue, apply);

  const live = document.createElement("div");
  live.className = "whatif-result";
  live.dataset.audit = "server-numbers";

  const timeline = document.createElement("ol");
  timeline.className = "history";
  timeline.dataset.audit = "server-numbers";

  const chartBox = document.createElement("div");
  chartBox.className = "chart";
  chartBox.dataset.audit = "server-numbers";
  const chartButton = document.createElement("button");
  chartButton.textContent = "Draw power curve";

  root.append(controls, live, timeline, chartButton, chartBox);

  const gate = createRequestGate();

  async function whatif(name: string, value: string): Promise<void> {
    const token = gate.next();
    let response: CommandResponse;
    try {
      response = await api.command(session.sessionId, `whatif ${name} ${value}`);
    } catch {
      return;
    }
    if (!gate.isLatest(token)) return; // stale: a newer command is in flight
    absorb(session, response);
    renderLive();
    renderTimeline();
    onUpdate();
  }

  const debounced = debounce((name: string, value: string) => void whatif(name, value),
    debounceMs);

  power.input.addEventListener("input", () => debounced.call("power", power.input.value));
  alpha.input.addEventListener("input", () => debounced.call("alpha", alpha.input.value));
  apply.addEventListener("click", () => {
    if (paramName.value) void whatif(paramName.value, paramValue.value);
  });

  chartButton.addEventListener("click", () => void drawCurve());

  async function drawCurve(): Promise<void> {
    const view = session.view;
    if (!view?.chosen_test) return;
    const params: Record<string, unknown> = {};
    for (const [key, value] of Object.entries(view.known_params)) {
      if (!["alpha", "tails", "power", "n"].includes(key)) params[key] = value;
    }
    const body = {
      test: view.chosen_test,
      params,
      sweep: "power",
      from: 0.5,
      to: 0.95,
      steps: 10,
      alpha: Number(view.known_params["alpha"] ?? 0.05),
    };
    const key = cacheKey(body);
    let curve = session.curveCache.get(key);
    if (!curve) {
      try {
        curve = await api.curve(body);
      } catch {
        return;
      }
      session.curveCache.set(key, curve);
    }
    renderCurve(chartBox, curve);
  }

  function renderLive(): void {
    live.textContent = "";
    const result = session.lastSolve;
    if (!result) return;
    const line = document.createElement("p");
    line.textContent =
      `n per arm ${(result.n_per_arm as number[]).join(" / ")} | total ${result.n_total}` +
      ` | achieved power ${result.achieved_power}`;
    live.appendChild(line);
  }

  function renderTimeline(): void {
    timeline.textContent = "";
    for (const result of solveHistory(session)) {
      const item = document.createElement("li");
      item.textContent = `n_total ${result.n_total} (power ${result.achieved_power})`;
      timeline.appendChild(item);
    }
  }

  return {
    root,
    refresh() {
      renderLive();
      renderTimeline();
    },
  };
}

function labeledRange(name: string, min: string, max: string, step: string, value: string) {
  const wrap = document.createElement("label");
  wrap.textContent = name;
  const input = document.createElement("input");
  input.type = "range";
  input.min = min;
  input.max = max;
  input.step = step;
  input.value = value;
  input.name = name;
  wrap.appendChild(input);
  return { wrap, input };
}

function labeledInput(name: string, value: string) {
  const wrap = document.createElement("label");
  wrap.textContent = name;
  const input = document.createElement("input");
  input.value = value;
  input.name = name;
  wrap.appendChild(input);
  return { wrap, input };
}
