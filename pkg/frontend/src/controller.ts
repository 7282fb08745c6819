/** Session state machine between the API client and the page.
 *
 * One query is in flight at a time; while one runs, the input is
 * reported busy.  Every visual change comes from a server keyframe.
 * The chat log can always be rebuilt from the server's history, which
 * is what sync() does after a page refresh.
 */

import {
  Api,
  HistoryEntry,
  OfflineError,
  QueryResponse,
  StageError,
} from "./api.js";
import { FramePlayer } from "./keyframes.js";

export interface ChatEntry {
  kind: "query" | "reset";
  text: string;
  ok: boolean;
  taskText?: string;
  stepKinds?: string[];
  keyframeCount?: number;
  error?: { stage: string; code: string; detail: string };
}

export interface ControllerState {
  sessionId: string | null;
  title: string;
  busy: boolean;
  offline: boolean;
  chat: ChatEntry[];
}

export class SessionController {
  readonly state: ControllerState = {
    sessionId: null,
    title: "",
    busy: false,
    offline: false,
    chat: [],
  };

  constructor(
    private readonly api: Api,
    private readonly player: FramePlayer,
    private readonly onChange: () => void = () => {},
  ) {}

  private emit(): void {
    this.onChange();
  }

  /** Create a session from a chart document and show its initial view. */
  async upload(spec: object): Promise<void> {
    this.requireIdle();
    this.state.busy = true;
    this.emit();
    try {
      const created = await this.api.createSession(spec);
      this.state.sessionId = created.sessionId;
      this.state.title = created.title;
      this.state.chat = [];
      this.state.offline = false;
      this.player.show(created.svg);
    } catch (err) {
      this.absorb(err);
      throw err;
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  /** Send one query and play its keyframes. Returns the chat entry. */
  async submit(text: string): Promise<ChatEntry> {
    const sessionId = this.requireSession();
    this.requireIdle();
    this.state.busy = true;
    this.emit();
    try {
      let response: QueryResponse;
      try {
        response = await this.api.query(sessionId, text);
      } catch (err) {
        const entry = this.absorb(err, text);
        if (entry) return entry;
        throw err;
      }
      // Frame 0 repeats the current view; animate the changes after it.
      const svgs = response.keyframes.map((f) => f.svg);
      await this.player.play(svgs);
      const entry: ChatEntry = {
        kind: "query",
        text,
        ok: true,
        taskText: response.task.text,
        stepKinds: response.plan.map((s) => s.kind),
        keyframeCount: response.keyframes.length,
      };
      this.state.chat.push(entry);
      this.state.offline = false;
      return entry;
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  /** Restore the initial view; the server keeps a reset marker. */
  async reset(): Promise<void> {
    const sessionId = this.requireSession();
    this.requireIdle();
    this.state.busy = true;
    this.emit();
    try {
      await this.api.reset(sessionId);
      const info = await this.api.sessionInfo(sessionId);
      this.player.show(info.svg);
      this.state.chat.push({ kind: "reset", text: "(reset)", ok: true });
      this.state.offline = false;
    } catch (err) {
      this.absorb(err);
      throw err;
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  /**
   * Rebuild the chat log from the server and redraw the current state.
   * After this, the chat mirrors the server history entry for entry.
   */
  async sync(): Promise<void> {
    const sessionId = this.requireSession();
    const [info, entries] = await Promise.all([
      this.api.sessionInfo(sessionId),
      this.api.history(sessionId),
    ]);
    this.state.title = info.title;
    this.state.chat = entries.map((e) => toChatEntry(e));
    this.player.show(info.svg);
    this.state.offline = false;
    this.emit();
  }

  /** Reattach to an existing session (page refresh with a stored id). */
  async attach(sessionId: string): Promise<void> {
    this.state.sessionId = sessionId;
    await this.sync();
  }

  private requireSession(): string {
    if (this.state.sessionId === null) {
      throw new Error("no session; upload a chart first");
    }
    return this.state.sessionId;
  }

  private requireIdle(): void {
    if (this.state.busy) {
      throw new Error("a query is already running");
    }
  }

  /**
   * Convert transport-level failures into controller state.  Returns a
   * chat entry when the failure belongs in the log (a rejected query),
   * undefined when it was connectivity.
   */
  private absorb(err: unknown, text?: string): ChatEntry | undefined {
    if (err instanceof OfflineError) {
      this.state.offline = true;
      return undefined;
    }
    if (err instanceof StageError && text !== undefined) {
      const entry: ChatEntry = {
        kind: "query",
        text,
        ok: false,
        error: { stage: err.stage, code: err.code, detail: err.detail },
      };
      this.state.chat.push(entry);
      return entry;
    }
    return undefined;
  }
}

export function toChatEntry(entry: HistoryEntry): ChatEntry {
  if (entry.kind === "reset") {
    return { kind: "reset", text: "(reset)", ok: true };
  }
  return {
    kind: "query",
    text: entry.query,
    ok: true,
    taskText: entry.task ?? undefined,
    stepKinds: entry.plan.map((s) => s.kind),
    keyframeCount: entry.keyframeCount,
  };
}
