/** DOM layer. Builds the page skeleton once, then repaints from state. */

import { ChatEntry, ControllerState } from "./controller.js";

export interface ViewHooks {
  onUpload: (spec: object) => void;
  onSubmit: (text: string) => void;
  onReset: () => void;
}

const TEMPLATE = `
  <header class="bar">
    <h1 id="chart-title">chartquery</h1>
    <div class="bar-right">
      <label class="upload-label">
        Upload chart
        <input type="file" id="spec-file" accept=".json,application/json" hidden>
      </label>
      <button id="reset-btn" disabled>Reset view</button>
    </div>
  </header>
  <div id="offline-banner" hidden>
    Server unreachable. Check that the service is running, then retry.
  </div>
  <main class="layout">
    <section id="chart-pane">
      <div id="chart-host">
        <p class="placeholder">Upload a chart document to begin.</p>
      </div>
    </section>
    <aside id="chat-pane">
      <ol id="chat-log"></ol>
    </aside>
  </main>
  <footer class="bar">
    <form id="query-form">
      <input
        id="query-input"
        type="text"
        placeholder="Ask about the chart..."
        autocomplete="off"
        disabled
      >
      <button id="send-btn" type="submit" disabled>Ask</button>
    </form>
  </footer>
`;

export class View {
  readonly chartHost: HTMLElement;
  private readonly chatLog: HTMLElement;
  private readonly input: HTMLInputElement;
  private readonly sendBtn: HTMLButtonElement;
  private readonly resetBtn: HTMLButtonElement;
  private readonly titleEl: HTMLElement;
  private readonly banner: HTMLElement;

  constructor(root: HTMLElement, hooks: ViewHooks) {
    root.innerHTML = TEMPLATE;
    const pick = <T extends HTMLElement>(id: string): T => {
      const el = root.querySelector<T>(`#${id}`);
      if (!el) throw new Error(`missing element #${id}`);
      return el;
    };
    this.chartHost = pick("chart-host");
    this.chatLog = pick("chat-log");
    this.input = pick<HTMLInputElement>("query-input");
    this.sendBtn = pick<HTMLButtonElement>("send-btn");
    this.resetBtn = pick<HTMLButtonElement>("reset-btn");
    this.titleEl = pick("chart-title");
    this.banner = pick("offline-banner");

    pick<HTMLInputElement>("spec-file").addEventListener("change", (event) => {
      const files = (event.target as HTMLInputElement).files;
      if (!files || files.length === 0) return;
      files[0].text().then((text) => {
        hooks.onUpload(JSON.parse(text));
      });
    });
    pick<HTMLFormElement>("query-form").addEventListener("submit", (event) => {
      event.preventDefault();
      const text = this.input.value.trim();
      if (text === "") return;
      this.input.value = "";
      hooks.onSubmit(text);
    });
    this.resetBtn.addEventListener("click", () => hooks.onReset());
  }

  render(state: ControllerState): void {
    this.titleEl.textContent = state.title || "chartquery";
    this.banner.hidden = !state.offline;
    const locked = state.busy || state.sessionId === null;
    this.input.disabled = locked;
    this.sendBtn.disabled = locked;
    this.resetBtn.disabled = locked;
    this.chatLog.replaceChildren(
      ...state.chat.map((entry) => renderEntry(entry, this.chatLog.ownerDocument)),
    );
    this.chatLog.lastElementChild?.scrollIntoView?.({ block: "end" });
  }
}

function renderEntry(entry: ChatEntry, doc: Document): HTMLElement {
  const item = doc.createElement("li");
  item.className = entry.kind === "reset" ? "chat-reset" : "chat-entry";
  if (entry.kind === "reset") {
    item.textContent = "view reset";
    return item;
  }
  const query = doc.createElement("p");
  query.className = "chat-query";
  query.textContent = entry.text;
  item.appendChild(query);

  const reply = doc.createElement("p");
  if (entry.ok) {
    reply.className = "chat-ok";
    const steps = entry.stepKinds?.join(", ") ?? "";
    reply.textContent = `${entry.taskText ?? ""}\n${steps} (${entry.keyframeCount ?? 0} frames)`;
  } else {
    reply.className = "chat-error";
    reply.textContent = `${entry.error?.stage ?? "request"} failed: ${entry.error?.detail ?? "unknown error"}`;
  }
  item.appendChild(reply);
  return item;
}
