import type {
  CandidatesResponse,
  FoldsResponse,
  SessionState,
  StepRequest,
  VerifyResponse,
} from "./types.js";

export class RevisionConflictError extends Error {
  constructor(public serverRevision: number, message: string) {
    super(message);
  }
}

export class RuleRejectedError extends Error {
  constructor(public kind: string, message: string) {
    super(message);
  }
}

export class ConnectionLostError extends Error {}

// The full surface the workbench needs; tests substitute a fixture-backed
// implementation, the browser uses HttpApi.
export interface Api {
  createSession(base: string, sessionId?: string): Promise<SessionState>;
  getSession(id: string): Promise<SessionState>;
  apply(id: string, revision: number, step: StepRequest, verify?: boolean): Promise<SessionState>;
  undo(id: string, revision: number): Promise<SessionState>;
  redo(id: string, revision: number): Promise<SessionState>;
  candidates(id: string, clause: string, folders?: string): Promise<CandidatesResponse>;
  folds(id: string, clause: string): Promise<FoldsResponse>;
  verifyStep(id: string, step: number): Promise<VerifyResponse>;
}

async function parseError(resp: Response): Promise<never> {
  const body = await resp.json().catch(() => ({ error: resp.statusText }));
  if (resp.status === 409) {
    throw new RevisionConflictError(body.revision ?? -1, body.error);
  }
  throw new RuleRejectedError(body.type ?? "Error", body.error ?? "request failed");
}

export class HttpApi implements Api {
  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string, payload?: unknown): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path, {
        method,
        headers: { "Content-Type": "application/json" },
        body: payload === undefined ? undefined : JSON.stringify(payload),
      });
    } catch {
      throw new ConnectionLostError("server unreachable");
    }
    if (!resp.ok) {
      await parseError(resp);
    }
    return resp.json() as Promise<T>;
  }

  createSession(base: string, sessionId?: string) {
    const payload: Record<string, unknown> = { base };
    if (sessionId) payload.session_id = sessionId;
    return this.request<SessionState>("POST", "/sessions", payload);
  }

  getSession(id: string) {
    return this.request<SessionState>("GET", `/sessions/${id}`);
  }

  apply(id: string, revision: number, step: StepRequest, verify = false) {
    return this.request<SessionState>("POST", `/sessions/${id}/apply`, {
      revision,
      verify,
      step,
    });
  }

  undo(id: string, revision: number) {
    return this.request<SessionState>("POST", `/sessions/${id}/undo`, { revision });
  }

  redo(id: string, revision: number) {
    return this.request<SessionState>("POST", `/sessions/${id}/redo`, { revision });
  }

  candidates(id: string, clause: string, folders?: string) {
    // clause ids and folder refs are plain [a-z0-9_:,] tokens; keep the
    // query readable and identical to what the recorded fixtures carry
    const suffix = folders ? `&folders=${folders}` : "";
    return this.request<CandidatesResponse>(
      "GET",
      `/sessions/${id}/candidates?clause=${clause}${suffix}`,
    );
  }

  folds(id: string, clause: string) {
    return this.request<FoldsResponse>("GET", `/sessions/${id}/folds?clause=${clause}`);
  }

  verifyStep(id: string, step: number) {
    return this.request<VerifyResponse>("POST", `/sessions/${id}/verify`, { step });
  }
}
