/** Typed client for the chartquery HTTP JSON API. */

export interface CreateSessionResponse {
  sessionId: string;
  title: string;
  svg: string;
  stateHash: string;
}

export interface PlanStep {
  kind: string;
  phase: string;
  params: Record<string, unknown>;
}

export interface Keyframe {
  index: number;
  step: PlanStep | null;
  svg: string;
}

export interface QueryResponse {
  task: { text: string; tree: unknown };
  plan: PlanStep[];
  keyframes: Keyframe[];
  stateHash: string;
}

export interface SessionInfo {
  sessionId: string;
  title: string;
  svg: string;
  stateHash: string;
  historyLength: number;
}

export interface HistoryEntry {
  kind: "query" | "reset";
  query: string;
  task: string | null;
  plan: PlanStep[];
  keyframeCount: number;
  timestamp: string;
}

/** The server rejected the query at a pipeline stage; state is unchanged. */
export class StageError extends Error {
  constructor(
    public readonly stage: string,
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(`${stage}: ${detail}`);
    this.name = "StageError";
  }
}

/** The server could not be reached at all. */
export class OfflineError extends Error {
  readonly cause: unknown;

  constructor(cause: unknown) {
    super("cannot reach the chartquery service");
    this.name = "OfflineError";
    this.cause = cause;
  }
}

/** Any other non-2xx reply. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** What the controller needs from a client; lets tests stub transport. */
export interface Api {
  createSession(spec: object): Promise<CreateSessionResponse>;
  sessionInfo(sessionId: string): Promise<SessionInfo>;
  query(sessionId: string, text: string): Promise<QueryResponse>;
  reset(sessionId: string): Promise<{ ok: boolean; stateHash: string }>;
  history(sessionId: string): Promise<HistoryEntry[]>;
  health(): Promise<{ status: string }>;
}

export class ApiClient implements Api {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (err) {
      throw new OfflineError(err);
    }
    if (response.ok) {
      return (await response.json()) as T;
    }
    let body: Record<string, unknown> = {};
    try {
      body = (await response.json()) as Record<string, unknown>;
    } catch {
      // non-JSON error body; fall through to the generic error
    }
    if (typeof body.stage === "string") {
      throw new StageError(
        body.stage,
        String(body.error ?? "Error"),
        String(body.detail ?? response.statusText),
      );
    }
    throw new ApiError(
      response.status,
      String(body.detail ?? body.error ?? response.statusText),
    );
  }

  createSession(spec: object): Promise<CreateSessionResponse> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ spec }),
    });
  }

  sessionInfo(sessionId: string): Promise<SessionInfo> {
    return this.request(`/sessions/${sessionId}`);
  }

  query(sessionId: string, text: string): Promise<QueryResponse> {
    return this.request(`/sessions/${sessionId}/query`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  reset(sessionId: string): Promise<{ ok: boolean; stateHash: string }> {
    return this.request(`/sessions/${sessionId}/reset`, { method: "POST" });
  }

  async history(sessionId: string): Promise<HistoryEntry[]> {
    const body = await this.request<{ entries: HistoryEntry[] }>(
      `/sessions/${sessionId}/history`,
    );
    return body.entries;
  }

  health(): Promise<{ status: string }> {
    return this.request("/healthz");
  }
}
