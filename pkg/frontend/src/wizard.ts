// Guided wizard: describe the study, review the recommended test, fill the
// pending parameter checklist, then read the solved design. Each step is a
// session command round trip; the UI renders exactly what came back.

import type { Api, CommandResponse } from "./api.js";
import { ApiError } from "./api.js";
import { absorb, type UiSession } from "./state.js";

type Refresh = () => void;

export type Wizard = {
  root: HTMLElement;
  refresh: Refresh;
};

export function createWizard(
  api: Api,
  session: UiSession,
  onUpdate: Refresh,
): Wizard {
  const root = document.createElement("section");
  root.className = "wizard";

  const describeForm = buildDescribeForm();
  const recommendation = document.createElement("div");
  recommendation.className = "recommendation";
  const paramForm = document.createElement("form");
  paramForm.className = "param-form";
  const resultView = document.createElement("div");
  resultView.className = "result-view";
  resultView.dataset.audit = "server-numbers";
  const errorBox = document.createElement("div");
  errorBox.className = "error-box";

  root.append(describeForm.element, recommendation, paramForm, resultView, errorBox);

  async function send(text: string): Promise<CommandResponse | null> {
    errorBox.textContent = "";
    try {
      const response = await api.command(session.sessionId, text);
      absorb(session, response);
      if (response.error) errorBox.textContent = response.reply;
      return response;
    } catch (err) {
      errorBox.textContent = err instanceof ApiError ? err.message : String(err);
      return null;
    }
  }

  describeForm.onSubmit(async (fields) => {
    const parts = Object.entries(fields)
      .filter(([, v]) => v !== "")
      .map(([k, v]) => `${k}=${v}`);
    const response = await send(`describe ${parts.join(" ")}`);
    if (response && !response.error) refresh();
  });

  function renderRecommendation(): void {
    recommendation.textContent = "";
    const view = session.view;
    if (!view?.chosen_test) return;
    const title = document.createElement("h3");
    title.textContent = `Recommended: ${view.chosen_test}`;
    const why = document.createElement("p");
    why.textContent = session.lastReply;
    recommendation.append(title, why);
  }

  function renderParamForm(): void {
    paramForm.textContent = "";
    const view = session.view;
    if (!view?.chosen_test) return;
    const known = view.known_params;
    const fields = [...view.pending, ...Object.keys(known)];
    for (const name of fields) {
      const label = document.createElement("label");
      label.textContent = name;
      const input = document.createElement("input");
      input.name = name;
      const current = known[name];
      if (current !== undefined && current !== null) {
        input.value = String(current);
        input.dataset.prefilled = "1";
      } else {
        input.placeholder = "required";
      }
      label.appendChild(input);
      paramForm.appendChild(label);
    }
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Solve sample size";
    paramForm.appendChild(submit);
  }

  paramForm.addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      const inputs = [...paramForm.querySelectorAll("input")];
      for (const input of inputs) {
        const dirty = input.dataset.prefilled !== "1" ||
          String(session.view?.known_params[input.name] ?? "") !== input.value;
        if (input.value !== "" && dirty) {
          const response = await send(`set ${input.name} ${input.value}`);
          if (!response || response.error) return;
        }
      }
      const solved = await send("solve n");
      if (solved && !solved.error) refresh();
    })();
  });

  function renderResult(): void {
    resultView.textContent = "";
    const result = session.lastSolve;
    if (!result) return;
    const rows: Array<[string, unknown]> = [
      ["n per arm", (result.n_per_arm as number[]).join(" / ")],
      ["n total", result.n_total],
      ["achieved power", result.achieved_power],
    ];
    if (result.events_required != null) rows.push(["events required", result.events_required]);
    if (result.effect_solved != null) rows.push(["minimal effect", result.effect_solved]);
    const table = document.createElement("table");
    for (const [label, value] of rows) {
      const tr = document.createElement("tr");
      const th = document.createElement("th");
      th.textContent = label;
      const td = document.createElement("td");
      td.textContent = String(value);
      tr.append(th, td);
      table.appendChild(tr);
    }
    const formula = document.createElement("p");
    formula.className = "formula-id";
    formula.textContent = String(result.formula_id ?? "");
    const explanation = document.createElement("p");
    explanation.className = "explanation";
    explanation.textContent = session.lastReply;
    resultView.append(table, formula, explanation);
  }

  function refresh(): void {
    renderRecommendation();
    renderParamForm();
    renderResult();
    onUpdate();
  }

  return { root, refresh };
}

const DESCRIPTOR_FIELDS: Array<[string, string[]]> = [
  ["outcome", ["continuous", "binary", "time_to_event", "correlation"]],
  ["groups", []],
  ["pairing", ["independent", "paired"]],
  ["comparison", ["between_groups", "vs_constant"]],
  ["assumption", ["unspecified", "parametric", "nonparametric"]],
  ["covariates", ["no", "yes"]],
];

function buildDescribeForm() {
  const element = document.createElement("form");
  element.className = "describe-form";
  const controls = new Map<string, HTMLInputElement | HTMLSelectElement>();
  for (const [name, options] of DESCRIPTOR_FIELDS) {
    const label = document.createElement("label");
    label.textContent = name;
    if (options.length === 0) {
      const input = document.createElement("input");
      input.name = name;
      input.type = "number";
      input.min = "1";
      input.value = "2";
      label.appendChild(input);
      controls.set(name, input);
    } else {
      const select = document.createElement("select");
      select.name = name;
      for (const option of options) {
        const el = document.createElement("option");
        el.value = option;
        el.textContent = option;
        select.appendChild(el);
      }
      label.appendChild(select);
      controls.set(name, select);
    }
    element.appendChild(label);
  }
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Recommend a test";
  element.appendChild(submit);

  let handler: ((fields: Record<string, string>) => void) | null = null;
  element.addEventListener("submit", (event) => {
    event.preventDefault();
    const fields: Record<string, string> = {};
    for (const [name, control] of controls) {
      if (name === "covariates") {
        if (control.value === "yes") fields[name] = "yes";
        continue;
      }
      fields[name] = control.value;
    }
    handler?.(fields);
  });
  return {
    element,
    onSubmit(fn: (fields: Record<string, string>) => void) {
      handler = fn;
    },
  };
}
