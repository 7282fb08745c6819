/** Page entry point: wire the client, player, controller, and view. */

import { ApiClient, ApiError } from "./api.js";
import { FramePlayer } from "./keyframes.js";
import { SessionController } from "./controller.js";
import { View } from "./view.js";

const SESSION_KEY = "chartquery.sessionId";

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? "http://localhost:8000";
}

function remember(sessionId: string | null): void {
  try {
    if (sessionId === null) {
      window.localStorage.removeItem(SESSION_KEY);
    } else {
      window.localStorage.setItem(SESSION_KEY, sessionId);
    }
  } catch {
    // storage may be unavailable; refresh restore is best effort
  }
}

function recall(): string | null {
  try {
    return window.localStorage.getItem(SESSION_KEY);
  } catch {
    return null;
  }
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");

  const api = new ApiClient(apiBase());
  let view: View;
  const hooks = {
    onUpload: (spec: object) => {
      controller
        .upload(spec)
        .then(() => remember(controller.state.sessionId))
        .catch(() => {});
    },
    onSubmit: (text: string) => {
      controller.submit(text).catch(() => {});
    },
    onReset: () => {
      controller.reset().catch(() => {});
    },
  };
  view = new View(root, hooks);
  const player = new FramePlayer(view.chartHost);
  const controller = new SessionController(api, player, () =>
    view.render(controller.state),
  );
  view.render(controller.state);

  const stored = recall();
  if (stored !== null) {
    try {
      await controller.attach(stored);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        remember(null);
        controller.state.sessionId = null;
      }
      view.render(controller.state);
    }
  }
}

boot();
