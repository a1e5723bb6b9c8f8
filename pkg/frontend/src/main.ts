// Entry point: create a session against the configured service and mount
// the wizard plus the what-if panel.

import { createApi } from "./api.js";
import { createUiSession, restoreView } from "./state.js";
import { createWhatIfPanel } from "./whatif.js";
import { createWizard } from "./wizard.js";

export async function mount(
  root: HTMLElement,
  baseUrl?: string,
  resumeSessionId?: string,
): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const api = createApi(baseUrl ?? params.get("service") ?? "");

  const header = document.createElement("header");
  const title = document.createElement("h1");
  title.textContent = "powerkit";
  const status = document.createElement("span");
  status.className = "status";
  header.append(title, status);
  root.appendChild(header);

  try {
    const health = await api.healthy();
    status.textContent = `service ${health.version} ready`;
  } catch {
    status.textContent = "service unreachable";
    return;
  }

  // a reload with ?session=<id> resumes the stored state instead of
  // starting over
  const resumeId = resumeSessionId ?? params.get("session");
  let session;
  let restored = false;
  if (resumeId) {
    session = createUiSession(resumeId);
    try {
      restoreView(session, await api.getSession(resumeId));
      restored = true;
    } catch {
      const created = await api.createSession();
      session = createUiSession(created.session_id);
    }
  } else {
    const created = await api.createSession();
    session = createUiSession(created.session_id);
  }

  const whatIf = createWhatIfPanel(api, session, () => wizard.refresh());
  const wizard = createWizard(api, session, () => whatIf.refresh());
  root.append(wizard.root, whatIf.root);
  if (restored) {
    wizard.refresh();
  }
}

if (typeof document !== "undefined" && document.querySelector("#app")) {
  void mount(document.querySelector("#app") as HTMLElement);
}
