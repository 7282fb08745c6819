import { beforeEach, describe, expect, it } from "vitest";

import {
  Api,
  CreateSessionResponse,
  HistoryEntry,
  OfflineError,
  QueryResponse,
  SessionInfo,
  StageError,
} from "../src/api.js";
import { SessionController, toChatEntry } from "../src/controller.js";
import { FramePlayer } from "../src/keyframes.js";

const SVG_A = `<svg xmlns="http://www.w3.org/2000/svg"><rect id="r" x="0"/></svg>`;
const SVG_B = `<svg xmlns="http://www.w3.org/2000/svg"><rect id="r" x="9"/></svg>`;

const CREATED: CreateSessionResponse = {
  sessionId: "s1",
  title: "Energy use",
  svg: SVG_A,
  stateHash: "h0",
};

const QUERY_OK: QueryResponse = {
  task: { text: "(identify coal)", tree: {} },
  plan: [{ kind: "highlight", phase: "output", params: {} }],
  keyframes: [
    { index: 0, step: null, svg: SVG_A },
    { index: 1, step: { kind: "highlight", phase: "output", params: {} }, svg: SVG_B },
  ],
  stateHash: "h1",
};

const INFO: SessionInfo = {
  sessionId: "s1",
  title: "Energy use",
  svg: SVG_B,
  stateHash: "h1",
  historyLength: 2,
};

function makeApi(overrides: Partial<Api> = {}): Api {
  const unexpected = (name: string) => () =>
    Promise.reject(new Error(`unexpected call: ${name}`));
  return {
    createSession: () => Promise.resolve(CREATED),
    sessionInfo: () => Promise.resolve(INFO),
    query: () => Promise.resolve(QUERY_OK),
    reset: () => Promise.resolve({ ok: true, stateHash: "h0" }),
    history: () => Promise.resolve([]),
    health: unexpected("health"),
    ...overrides,
  };
}

let host: HTMLElement;
let changes: number;

function makeController(api: Api): SessionController {
  host = document.createElement("div");
  document.body.appendChild(host);
  changes = 0;
  const player = new FramePlayer(host, { stepMs: 0 });
  return new SessionController(api, player, () => {
    changes += 1;
  });
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("upload", () => {
  it("creates a session and shows the initial chart", async () => {
    const controller = makeController(makeApi());
    await controller.upload({ rows: [] });
    expect(controller.state.sessionId).toBe("s1");
    expect(controller.state.title).toBe("Energy use");
    expect(controller.state.chat).toEqual([]);
    expect(controller.state.busy).toBe(false);
    expect(host.querySelector("#r")?.getAttribute("x")).toBe("0");
    expect(changes).toBeGreaterThan(0);
  });

  it("flags offline when the service is unreachable", async () => {
    const controller = makeController(
      makeApi({ createSession: () => Promise.reject(new OfflineError("down")) }),
    );
    await expect(controller.upload({})).rejects.toBeInstanceOf(OfflineError);
    expect(controller.state.offline).toBe(true);
    expect(controller.state.sessionId).toBeNull();
  });
});

describe("submit", () => {
  it("plays the keyframes and logs a successful entry", async () => {
    const controller = makeController(makeApi());
    await controller.upload({});
    const entry = await controller.submit("highlight coal");
    expect(entry).toEqual({
      kind: "query",
      text: "highlight coal",
      ok: true,
      taskText: "(identify coal)",
      stepKinds: ["highlight"],
      keyframeCount: 2,
    });
    expect(controller.state.chat).toEqual([entry]);
    expect(host.querySelector("#r")?.getAttribute("x")).toBe("9");
    expect(controller.state.busy).toBe(false);
  });

  it("refuses a second query while one is in flight", async () => {
    let release: (value: QueryResponse) => void = () => {};
    const gate = new Promise<QueryResponse>((resolve) => {
      release = resolve;
    });
    const controller = makeController(makeApi({ query: () => gate }));
    await controller.upload({});
    const first = controller.submit("one");
    expect(controller.state.busy).toBe(true);
    await expect(controller.submit("two")).rejects.toThrow(/already running/);
    release(QUERY_OK);
    await first;
    expect(controller.state.chat).toHaveLength(1);
    expect(controller.state.busy).toBe(false);
  });

  it("requires a session", async () => {
    const controller = makeController(makeApi());
    await expect(controller.submit("anything")).rejects.toThrow(/no session/);
  });

  it("logs a stage failure inline and leaves the chart untouched", async () => {
    const controller = makeController(
      makeApi({
        query: () =>
          Promise.reject(
            new StageError("translate", "UntranslatableQuery", "cannot zoom"),
          ),
      }),
    );
    await controller.upload({});
    const before = host.innerHTML;
    const entry = await controller.submit("zoom in please");
    expect(entry.ok).toBe(false);
    expect(entry.error).toEqual({
      stage: "translate",
      code: "UntranslatableQuery",
      detail: "cannot zoom",
    });
    expect(controller.state.chat).toEqual([entry]);
    expect(host.innerHTML).toBe(before);
    expect(controller.state.busy).toBe(false);
    expect(controller.state.offline).toBe(false);
  });

  it("marks the session offline when the transport drops", async () => {
    const api = makeApi({
      query: () => Promise.reject(new OfflineError("refused")),
    });
    const controller = makeController(api);
    await controller.upload({});
    await expect(controller.submit("anything")).rejects.toBeInstanceOf(
      OfflineError,
    );
    expect(controller.state.offline).toBe(true);
    expect(controller.state.chat).toEqual([]);

    // a later success clears the flag
    (api as { query: Api["query"] }).query = () => Promise.resolve(QUERY_OK);
    await controller.submit("retry");
    expect(controller.state.offline).toBe(false);
  });
});

describe("reset", () => {
  it("restores the initial view and logs a divider entry", async () => {
    const controller = makeController(
      makeApi({
        sessionInfo: () => Promise.resolve({ ...INFO, svg: SVG_A }),
      }),
    );
    await controller.upload({});
    await controller.submit("highlight coal");
    await controller.reset();
    expect(controller.state.chat.at(-1)).toEqual({
      kind: "reset",
      text: "(reset)",
      ok: true,
    });
    expect(host.querySelector("#r")?.getAttribute("x")).toBe("0");
  });
});

describe("sync", () => {
  const SERVER_HISTORY: HistoryEntry[] = [
    {
      kind: "query",
      query: "highlight coal",
      task: "(identify coal)",
      plan: [{ kind: "highlight", phase: "output", params: {} }],
      keyframeCount: 2,
      timestamp: "2026-08-21T10:00:00+00:00",
    },
    {
      kind: "reset",
      query: "",
      task: null,
      plan: [],
      keyframeCount: 0,
      timestamp: "2026-08-21T10:01:00+00:00",
    },
  ];

  it("rebuilds the chat log from the server history", async () => {
    const controller = makeController(
      makeApi({ history: () => Promise.resolve(SERVER_HISTORY) }),
    );
    await controller.attach("s1");
    expect(controller.state.sessionId).toBe("s1");
    expect(controller.state.title).toBe("Energy use");
    expect(controller.state.chat).toEqual(SERVER_HISTORY.map(toChatEntry));
    expect(controller.state.chat[0]).toEqual({
      kind: "query",
      text: "highlight coal",
      ok: true,
      taskText: "(identify coal)",
      stepKinds: ["highlight"],
      keyframeCount: 2,
    });
    expect(host.querySelector("#r")?.getAttribute("x")).toBe("9");
  });
});
