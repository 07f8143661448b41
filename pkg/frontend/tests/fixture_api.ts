// Api implementation backed by a recorded exchange log.  Every call must
// line up with the next recorded request byte-for-byte (method, path, and
// canonical JSON body); the recorded response is returned verbatim.  This is
// what enforces "the UI performs no transformation logic locally": anything
// the UI shows must have come out of one of these responses.

import type { Api } from "../src/api.js";
import { RevisionConflictError, RuleRejectedError } from "../src/api.js";
import type {
  CandidatesResponse,
  FoldsResponse,
  SessionState,
  StepRequest,
  VerifyResponse,
} from "../src/types.js";

export interface Exchange {
  method: string;
  path: string;
  request: unknown;
  status: number;
  response: Record<string, unknown>;
}

export function stableStringify(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(stableStringify).join(",") + "]";
  }
  const entries = Object.keys(value as Record<string, unknown>)
    .sort()
    .map((k) => JSON.stringify(k) + ":" + stableStringify((value as Record<string, unknown>)[k]));
  return "{" + entries.join(",") + "}";
}

export class FixtureApi implements Api {
  private cursor = 0;

  constructor(private exchanges: Exchange[]) {}

  get remaining(): number {
    return this.exchanges.length - this.cursor;
  }

  private take(method: string, path: string, request: unknown): Record<string, unknown> {
    if (this.cursor >= this.exchanges.length) {
      throw new Error(`no recorded exchange left for ${method} ${path}`);
    }
    const expected = this.exchanges[this.cursor];
    const gotKey = `${method} ${path} ${stableStringify(request ?? null)}`;
    const wantKey = `${expected.method} ${expected.path} ${stableStringify(expected.request ?? null)}`;
    if (gotKey !== wantKey) {
      throw new Error(`request drift at exchange ${this.cursor}:\n  sent     ${gotKey}\n  recorded ${wantKey}`);
    }
    this.cursor += 1;
    if (expected.status === 409) {
      const rev = expected.response.revision as number;
      throw new RevisionConflictError(rev, String(expected.response.error));
    }
    if (expected.status >= 400) {
      throw new RuleRejectedError(String(expected.response.type ?? "Error"),
        String(expected.response.error));
    }
    return expected.response;
  }

  async createSession(base: string, sessionId?: string): Promise<SessionState> {
    const payload: Record<string, unknown> = { base };
    if (sessionId) payload.session_id = sessionId;
    return this.take("POST", "/sessions", payload) as unknown as SessionState;
  }

  async getSession(id: string): Promise<SessionState> {
    return this.take("GET", `/sessions/${id}`, null) as unknown as SessionState;
  }

  async apply(id: string, revision: number, step: StepRequest, verify = false): Promise<SessionState> {
    return this.take("POST", `/sessions/${id}/apply`, {
      revision,
      verify,
      step,
    }) as unknown as SessionState;
  }

  async undo(id: string, revision: number): Promise<SessionState> {
    return this.take("POST", `/sessions/${id}/undo`, { revision }) as unknown as SessionState;
  }

  async redo(id: string, revision: number): Promise<SessionState> {
    return this.take("POST", `/sessions/${id}/redo`, { revision }) as unknown as SessionState;
  }

  async candidates(id: string, clause: string, folders?: string): Promise<CandidatesResponse> {
    const suffix = folders ? `&folders=${folders}` : "";
    return this.take(
      "GET",
      `/sessions/${id}/candidates?clause=${clause}${suffix}`,
      null,
    ) as unknown as CandidatesResponse;
  }

  async folds(id: string, clause: string): Promise<FoldsResponse> {
    return this.take("GET", `/sessions/${id}/folds?clause=${clause}`, null) as unknown as FoldsResponse;
  }

  async verifyStep(id: string, step: number): Promise<VerifyResponse> {
    return this.take("POST", `/sessions/${id}/verify`, { step }) as unknown as VerifyResponse;
  }
}
